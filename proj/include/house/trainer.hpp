#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <unordered_set>
#include <vector>

#include "house/dataset.hpp"
#include "house/model.hpp"
#include "house/rng.hpp"

namespace house {

struct TrainConfig {
  int batch_size = 256;      // positives per step
  int negatives = 8;         // corrupted triples per positive
  double alpha = 1.0;        // self-adversarial temperature
  double gamma = kDefaultMargin;
  double lr = 1e-3;
  double lambda = 0.0;       // entity L2 coefficient
  std::int64_t max_steps = 1000;
  std::int64_t valid_every = 500;
  std::uint64_t seed = 1;
  int threads = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  // Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

// Numerically stable logistic function and its log.
double logistic(double x);
double log_sigmoid(double x);

using TripleSet = std::unordered_set<Triple, TripleHash>;

// l corrupted copies of pos with the chosen side replaced by an entity drawn
// uniformly from [0, num_entities). Candidates that form a known true
// training triple are redrawn, up to 100 attempts each, then accepted as-is.
std::vector<Triple> sample_negatives(const Triple& pos, int l, Side corrupt_side,
                                     Rng& rng, const TripleSet& train_triples,
                                     int num_entities);

// Softmax over negatives of (-alpha * distance). Treated as constants during
// backpropagation.
std::vector<double> adversarial_weights(std::span<const double> neg_distances,
                                        double alpha);

// Margin loss of one positive against its weighted negatives:
//   -log sigma(gamma - pos_d) - sum_i w_i log sigma(neg_d_i - gamma) + reg_term.
double loss_value(double pos_d, std::span<const double> neg_ds,
                  std::span<const double> weights, double gamma, double reg_term);

// (lambda / |E|) * sum over all entities of the squared embedding norm.
double regularization_term(const Model& model, double lambda);

// One positive with its negatives; every negative differs from pos only on
// corrupt_side.
struct BatchItem {
  Triple pos;
  Side corrupt_side = Side::kHead;
  std::vector<Triple> negs;
};

struct RelationGrads {
  std::vector<double> rot;      // d x 2n x k, raw-parameter space
  std::vector<double> axes[2];  // d x m x k per side
  std::vector<double> taus[2];  // d x m per side
  std::vector<double> trans;    // d x k, empty unless the variant has one
};

// Sparse gradients: only rows touched by the batch are present.
struct GradientSet {
  std::map<std::int32_t, std::vector<double>> entities;  // row id -> d x k
  std::map<std::int32_t, RelationGrads> relations;
  bool finite() const;
};

struct BatchGradients {
  double loss = 0.0;  // batch-mean loss including the regularization term
  GradientSet grads;
};

// Gradients of the batch-mean loss with respect to every touched parameter,
// with adversarial weights held fixed. When cfg.lambda > 0 the entity rows
// additionally carry (2 lambda / |E|) * S_e and the loss includes the full
// regularization sum. Throws DegenerateVectorError if a raw vector of a
// touched relation is degenerate.
BatchGradients loss_gradients(const Model& model, std::span<const BatchItem> batch,
                              const TrainConfig& cfg);

struct Moments {
  std::vector<double> m, v;
};

struct OptimizerState {
  std::int64_t step = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  Moments entities, rotations, axes_head, axes_tail, taus_head, taus_tail, translations;
  // Lazy multiplicative entity decay: cum_decay is the running product of all
  // per-step factors; a row is brought current by multiplying with
  // cum_decay / decay_snapshot[row] when next touched. tick_stamp counts how
  // many steps have contributed a factor, so a step's factor is applied
  // exactly once whether or not begin_decay_step ran.
  double cum_decay = 1.0;
  std::int64_t tick_stamp = 0;
  std::vector<double> decay_snapshot;

  static OptimizerState init(const ModelConfig& cfg, double beta1 = 0.9,
                             double beta2 = 0.999, double eps = 1e-8);
};

// Advances the decay product by the upcoming step's factor and brings the
// given entity rows current, so the forward pass reads the same values a
// dense per-step decay would produce. Call before loss_gradients when
// lambda > 0; adam_step then skips its own tick for that step.
void begin_decay_step(Model& model, OptimizerState& state, double lr, double lambda,
                      std::span<const std::int32_t> entity_rows);

// One bias-corrected Adam step over the rows present in grads. Entity
// regularization is applied as decoupled multiplicative decay with the factor
// (1 - 2 * lr * lambda / |E|) before the Adam delta, lazily compounded per row.
void adam_step(Model& model, const GradientSet& grads, OptimizerState& state, double lr,
               double lambda);

// Brings every entity row current on pending decay. Must run before the model
// is read densely (evaluation, checkpointing, end of training).
void flush_decay(Model& model, OptimizerState& state);

struct TrainResult {
  Model model;                   // best validation MRR, or final when never evaluated
  double best_valid_mrr = -1.0;  // -1 when no evaluation ran
  std::int64_t best_step = 0;
  std::int64_t steps_run = 0;
  double final_lr = 0.0;
};

// Runs cfg.max_steps batches of self-adversarial training, evaluating
// filtered validation metrics every cfg.valid_every steps (and once at the
// final step). Keeps the parameters with the best validation MRR. The
// learning rate is halved at most once, after 3 consecutive non-improving
// evaluations. When log is non-null, writes one tab-separated line per
// evaluation: step, mean loss since the previous evaluation, MR, MRR,
// Hits@1, Hits@3, Hits@10, wall seconds.
TrainResult train(Model model, const TripleStore& store, const TrainConfig& cfg,
                  std::ostream* log = nullptr);

}  // namespace house
