#include "house/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "house/evaluator.hpp"
#include "house/householder.hpp"
#include "house/parallel.hpp"

namespace house {

namespace {

constexpr double kDecayUnderflow = 1e-280;

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

void TrainConfig::validate() const {
  require(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
  require(negatives >= 1, "TrainConfig: negatives must be >= 1");
  require(std::isfinite(alpha), "TrainConfig: alpha must be finite");
  require(gamma > 0.0, "TrainConfig: gamma must be > 0");
  require(lr > 0.0, "TrainConfig: lr must be > 0");
  require(lambda >= 0.0, "TrainConfig: lambda must be >= 0");
  require(max_steps >= 0, "TrainConfig: max_steps must be >= 0");
  require(valid_every >= 1, "TrainConfig: valid_every must be >= 1");
  require(threads >= 1, "TrainConfig: threads must be >= 1");
  require(beta1 > 0.0 && beta1 < 1.0, "TrainConfig: beta1 must be in (0, 1)");
  require(beta2 > 0.0 && beta2 < 1.0, "TrainConfig: beta2 must be in (0, 1)");
  require(adam_eps > 0.0, "TrainConfig: adam_eps must be > 0");
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

std::vector<Triple> sample_negatives(const Triple& pos, int l, Side corrupt_side,
                                     Rng& rng, const TripleSet& train_triples,
                                     int num_entities) {
  require(l >= 1, "sample_negatives: l must be >= 1");
  require(num_entities >= 1, "sample_negatives: no entities to draw from");
  std::vector<Triple> negs(std::size_t(l), pos);
  for (Triple& n : negs) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      const std::int32_t e = std::int32_t(rng.below(std::uint64_t(num_entities)));
      if (corrupt_side == Side::kHead) {
        n.h = e;
      } else {
        n.t = e;
      }
      if (train_triples.find(n) == train_triples.end()) break;
    }
  }
  return negs;
}

std::vector<double> adversarial_weights(std::span<const double> neg_distances,
                                        double alpha) {
  require(!neg_distances.empty(), "adversarial_weights: need at least one distance");
  double top = -std::numeric_limits<double>::infinity();
  for (const double d : neg_distances) top = std::max(top, -alpha * d);
  std::vector<double> w(neg_distances.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(-alpha * neg_distances[i] - top);
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

double loss_value(double pos_d, std::span<const double> neg_ds,
                  std::span<const double> weights, double gamma, double reg_term) {
  require(neg_ds.size() == weights.size(),
          "loss_value: weights and distances must pair up");
  double loss = -log_sigmoid(gamma - pos_d);
  for (std::size_t i = 0; i < neg_ds.size(); ++i) {
    loss -= weights[i] * log_sigmoid(neg_ds[i] - gamma);
  }
  return loss + reg_term;
}

double regularization_term(const Model& model, double lambda) {
  if (lambda <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (const double v : model.entities) sum_sq += v * v;
  return lambda / double(model.cfg.num_entities) * sum_sq;
}

bool GradientSet::finite() const {
  const auto all_finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  for (const auto& [e, g] : entities) {
    if (!all_finite(g)) return false;
  }
  for (const auto& [r, rg] : relations) {
    if (!all_finite(rg.rot) || !all_finite(rg.trans)) return false;
    for (int s : {0, 1}) {
      if (!all_finite(rg.axes[s]) || !all_finite(rg.taus[s])) return false;
    }
  }
  return true;
}

// ---- gradient engine --------------------------------------------------------

namespace {

// Forward stages of one entity through a relation's per-row chains. Stage
// buffers keep every intermediate representation so the backward pass can
// form parameter gradients without recomputation.
struct PathState {
  std::int32_t entity = -1;
  std::vector<double> proj;       // (m+1) stages x d x k; stage 0 = entity row
  std::vector<double> rot;        // (2n+1) stages x d x k; head paths only
  std::vector<double> final_rep;  // d x k, after the optional translation
  std::vector<double> diff;       // d x k, head final minus tail final
  std::vector<double> norms;      // d row distances
  double dist = 0.0;

  void resize(const ModelConfig& cfg) {
    const std::size_t dk = cfg.entity_stride();
    proj.assign(std::size_t(cfg.m + 1) * dk, 0.0);
    rot.assign(std::size_t(cfg.two_n() + 1) * dk, 0.0);
    final_rep.assign(dk, 0.0);
    diff.assign(dk, 0.0);
    norms.assign(std::size_t(cfg.d), 0.0);
    dist = 0.0;
  }
};

struct Workspace {
  RelationUnits units;
  PathState shared;
  std::vector<PathState> cand;
  std::vector<double> neg_d;
  std::vector<double> shared_bar;
  std::vector<double> path_bar;
  bool ready = false;

  void resize(const ModelConfig& cfg, int l) {
    units.resize(cfg);
    shared.resize(cfg);
    cand.assign(std::size_t(l) + 1, PathState{});
    for (PathState& p : cand) p.resize(cfg);
    neg_d.assign(std::size_t(l), 0.0);
    shared_bar.assign(cfg.entity_stride(), 0.0);
    path_bar.assign(cfg.entity_stride(), 0.0);
    ready = true;
  }
};

int side_index(Side s) { return s == Side::kHead ? 0 : 1; }

// Runs the m projections of one side, recording each stage.
void forward_projection(const Model& model, const RelationUnits& u, Side side,
                        std::int32_t e, PathState& ps) {
  const int d = u.d, m = u.m, k = u.k;
  const std::size_t dk = std::size_t(d) * k;
  const int si = side_index(side);
  const auto src = model.entity(e);
  ps.entity = e;
  std::copy(src.begin(), src.end(), ps.proj.begin());
  for (int s = 0; s < m; ++s) {
    double* prev = ps.proj.data() + std::size_t(s) * dk;
    double* next = prev + dk;
    std::copy(prev, prev + dk, next);
    for (int row = 0; row < d; ++row) {
      const std::span<const double> p(
          u.axis_units[si].data() + (std::size_t(row) * m + std::size_t(s)) * k, std::size_t(k));
      project_unit(p, u.taus[si][std::size_t(row) * m + std::size_t(s)],
                   std::span<double>(next + std::size_t(row) * k, std::size_t(k)));
    }
  }
}

// Runs the 2n reflections on top of the last projection stage.
void forward_rotation(const RelationUnits& u, PathState& ps) {
  const int d = u.d, two_n = u.two_n, k = u.k;
  const std::size_t dk = std::size_t(d) * k;
  const double* in = ps.proj.data() + std::size_t(u.m) * dk;
  std::copy(in, in + dk, ps.rot.begin());
  for (int j = 0; j < two_n; ++j) {
    double* prev = ps.rot.data() + std::size_t(j) * dk;
    double* next = prev + dk;
    std::copy(prev, prev + dk, next);
    for (int row = 0; row < d; ++row) {
      const std::span<const double> un(
          u.rot_units.data() + (std::size_t(row) * two_n + std::size_t(j)) * k, std::size_t(k));
      reflect_unit(un, std::span<double>(next + std::size_t(row) * k, std::size_t(k)));
    }
  }
}

void finalize_head(const Model& model, const RelationUnits& u, int r, PathState& ps) {
  const std::size_t dk = std::size_t(u.d) * u.k;
  const double* top = ps.rot.data() + std::size_t(u.two_n) * dk;
  std::copy(top, top + dk, ps.final_rep.begin());
  if (model.cfg.has_translation()) {
    const auto b = model.translation(r);
    for (std::size_t i = 0; i < dk; ++i) ps.final_rep[i] += b[i];
  }
}

void finalize_tail(const RelationUnits& u, PathState& ps) {
  const std::size_t dk = std::size_t(u.d) * u.k;
  const double* top = ps.proj.data() + std::size_t(u.m) * dk;
  std::copy(top, top + dk, ps.final_rep.begin());
}

void pair_distance(const RelationUnits& u, std::span<const double> head_final,
                   std::span<const double> tail_final, PathState& cand) {
  const int d = u.d, k = u.k;
  for (std::size_t i = 0; i < head_final.size(); ++i) {
    cand.diff[i] = head_final[i] - tail_final[i];
  }
  cand.dist = 0.0;
  for (int row = 0; row < d; ++row) {
    const std::span<const double> row_diff(cand.diff.data() + std::size_t(row) * k,
                                           std::size_t(k));
    cand.norms[std::size_t(row)] = vector_norm(row_diff);
    cand.dist += cand.norms[std::size_t(row)];
  }
}

// Pulls `bar` back through the reflections, accumulating unit-space direction
// gradients; afterwards bar holds the gradient at the rotation input.
void backward_rotation(const RelationUnits& u, const PathState& ps, std::span<double> bar,
                       std::vector<double>& rot_grad) {
  const int d = u.d, two_n = u.two_n, k = u.k;
  const std::size_t dk = std::size_t(d) * k;
  for (int j = two_n - 1; j >= 0; --j) {
    const double* x_stage = ps.rot.data() + std::size_t(j) * dk;
    for (int row = 0; row < d; ++row) {
      const std::size_t slot = std::size_t(row) * two_n + std::size_t(j);
      const std::span<const double> un(u.rot_units.data() + slot * k, std::size_t(k));
      const std::span<double> y(bar.data() + std::size_t(row) * k, std::size_t(k));
      const double* x = x_stage + std::size_t(row) * k;
      const double uy = dot(un, y);
      double ux = 0.0;
      for (int c = 0; c < k; ++c) ux += un[std::size_t(c)] * x[c];
      double* g = rot_grad.data() + slot * k;
      for (int c = 0; c < k; ++c) {
        g[c] -= 2.0 * (uy * x[c] + ux * y[std::size_t(c)]);
      }
      reflect_unit(un, y);
    }
  }
}

// Same for the projection chain of one side; also accumulates tau gradients.
void backward_projection(const RelationUnits& u, Side side, const PathState& ps,
                         std::span<double> bar, RelationGrads& rg) {
  const int d = u.d, m = u.m, k = u.k;
  const std::size_t dk = std::size_t(d) * k;
  const int si = side_index(side);
  for (int s = m - 1; s >= 0; --s) {
    const double* x_stage = ps.proj.data() + std::size_t(s) * dk;
    for (int row = 0; row < d; ++row) {
      const std::size_t slot = std::size_t(row) * m + std::size_t(s);
      const std::span<const double> p(u.axis_units[si].data() + slot * k, std::size_t(k));
      const double tau = u.taus[si][slot];
      const std::span<double> y(bar.data() + std::size_t(row) * k, std::size_t(k));
      const double* x = x_stage + std::size_t(row) * k;
      const double py = dot(p, y);
      double px = 0.0;
      for (int c = 0; c < k; ++c) px += p[std::size_t(c)] * x[c];
      double* g = rg.axes[si].data() + slot * k;
      for (int c = 0; c < k; ++c) {
        g[c] -= tau * (py * x[c] + px * y[std::size_t(c)]);
      }
      rg.taus[si][slot] -= px * py;
      project_unit(p, tau, y);
    }
  }
}

std::vector<double>& entity_grads(GradientSet& gs, const ModelConfig& cfg,
                                  std::int32_t e) {
  std::vector<double>& v = gs.entities[e];
  if (v.empty()) v.assign(cfg.entity_stride(), 0.0);
  return v;
}

RelationGrads& relation_grads(GradientSet& gs, const ModelConfig& cfg, std::int32_t r) {
  RelationGrads& rg = gs.relations[r];
  if (rg.rot.empty()) {
    rg.rot.assign(cfg.rotation_stride(), 0.0);
    for (int s : {0, 1}) {
      rg.axes[s].assign(cfg.axis_stride(), 0.0);
      rg.taus[s].assign(cfg.tau_stride(), 0.0);
    }
    if (cfg.has_translation()) rg.trans.assign(cfg.entity_stride(), 0.0);
  }
  return rg;
}

// Forward and backward of one positive with its negatives. The un-corrupted
// side is transformed once and its upstream gradient accumulated over all
// candidate pairings (the chains are linear maps, so the sum commutes with
// the backward pass). Returns the item's unscaled loss.
double process_item(const Model& model, const BatchItem& item, const TrainConfig& cfg,
                    double inv_b, GradientSet& out, Workspace& ws) {
  const ModelConfig& mc = model.cfg;
  const Triple& pos = item.pos;
  model.check_relation(pos.r);
  model.check_entity(pos.h);
  model.check_entity(pos.t);
  const bool cand_is_head = item.corrupt_side == Side::kHead;
  const std::int32_t shared_id = cand_is_head ? pos.t : pos.h;
  const int l = int(item.negs.size());
  require(l >= 1, "loss_gradients: every item needs at least one negative");
  for (const Triple& n : item.negs) {
    require(n.r == pos.r && (cand_is_head ? n.t == pos.t : n.h == pos.h),
            "loss_gradients: negative must differ from its positive only on the "
            "corrupted side");
    model.check_entity(cand_is_head ? n.h : n.t);
  }
  if (!ws.ready || ws.cand.size() != std::size_t(l) + 1) ws.resize(mc, l);

  normalize_relation(model, pos.r, ws.units);
  const RelationUnits& u = ws.units;
  const std::size_t dk = mc.entity_stride();

  // Shared side forward.
  forward_projection(model, u, cand_is_head ? Side::kTail : Side::kHead, shared_id,
                     ws.shared);
  if (cand_is_head) {
    finalize_tail(u, ws.shared);
  } else {
    forward_rotation(u, ws.shared);
    finalize_head(model, u, pos.r, ws.shared);
  }

  // Candidate paths: slot 0 is the positive's corrupted-side entity.
  for (int p = 0; p <= l; ++p) {
    PathState& cand = ws.cand[std::size_t(p)];
    const Triple& src = p == 0 ? pos : item.negs[std::size_t(p) - 1];
    const std::int32_t e = cand_is_head ? src.h : src.t;
    forward_projection(model, u, item.corrupt_side, e, cand);
    if (cand_is_head) {
      forward_rotation(u, cand);
      finalize_head(model, u, pos.r, cand);
      pair_distance(u, cand.final_rep, ws.shared.final_rep, cand);
    } else {
      finalize_tail(u, cand);
      pair_distance(u, ws.shared.final_rep, cand.final_rep, cand);
    }
    if (p > 0) ws.neg_d[std::size_t(p) - 1] = cand.dist;
  }

  const std::vector<double> weights = adversarial_weights(ws.neg_d, cfg.alpha);
  const double pos_d = ws.cand[0].dist;
  double loss = -log_sigmoid(cfg.gamma - pos_d);
  for (int j = 0; j < l; ++j) {
    loss -= weights[std::size_t(j)] * log_sigmoid(ws.neg_d[std::size_t(j)] - cfg.gamma);
  }

  // Backward. Loss coefficients per pairing; adversarial weights are constants.
  RelationGrads& rg = relation_grads(out, mc, pos.r);
  std::fill(ws.shared_bar.begin(), ws.shared_bar.end(), 0.0);
  for (int p = 0; p <= l; ++p) {
    PathState& cand = ws.cand[std::size_t(p)];
    const double c_p =
        (p == 0 ? logistic(pos_d - cfg.gamma)
                : -weights[std::size_t(p) - 1] * logistic(cfg.gamma - cand.dist)) *
        inv_b;
    for (int row = 0; row < mc.d; ++row) {
      const double norm = cand.norms[std::size_t(row)];
      const double coef = norm > 0.0 ? c_p / norm : 0.0;
      for (int c = 0; c < mc.k; ++c) {
        const std::size_t i = std::size_t(row) * mc.k + std::size_t(c);
        const double db = coef * cand.diff[i];  // gradient wrt (head - tail)
        ws.path_bar[i] = cand_is_head ? db : -db;
        ws.shared_bar[i] += cand_is_head ? -db : db;
      }
    }
    if (cand_is_head) {
      if (mc.has_translation()) {
        for (std::size_t i = 0; i < dk; ++i) rg.trans[i] += ws.path_bar[i];
      }
      backward_rotation(u, cand, ws.path_bar, rg.rot);
      backward_projection(u, Side::kHead, cand, ws.path_bar, rg);
    } else {
      backward_projection(u, Side::kTail, cand, ws.path_bar, rg);
    }
    std::vector<double>& eg = entity_grads(out, mc, cand.entity);
    for (std::size_t i = 0; i < dk; ++i) eg[i] += ws.path_bar[i];
  }

  if (cand_is_head) {
    backward_projection(u, Side::kTail, ws.shared, ws.shared_bar, rg);
  } else {
    if (mc.has_translation()) {
      for (std::size_t i = 0; i < dk; ++i) rg.trans[i] += ws.shared_bar[i];
    }
    backward_rotation(u, ws.shared, ws.shared_bar, rg.rot);
    backward_projection(u, Side::kHead, ws.shared, ws.shared_bar, rg);
  }
  std::vector<double>& eg = entity_grads(out, mc, shared_id);
  for (std::size_t i = 0; i < dk; ++i) eg[i] += ws.shared_bar[i];

  return loss;
}

// Rewrites a unit-space direction gradient as the gradient with respect to
// the raw (unnormalized) vector: w_grad = (g - <g, n> n) / ||w||.
void to_raw_space(std::span<double> g, std::span<const double> unit, double norm) {
  double c = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) c += g[i] * unit[i];
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = (g[i] - c * unit[i]) / norm;
}

void merge_into(GradientSet& dst, GradientSet&& src) {
  for (auto& [e, vec] : src.entities) {
    std::vector<double>& d = dst.entities[e];
    if (d.empty()) {
      d = std::move(vec);
    } else {
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += vec[i];
    }
  }
  for (auto& [r, rg] : src.relations) {
    RelationGrads& d = dst.relations[r];
    if (d.rot.empty()) {
      d = std::move(rg);
      continue;
    }
    for (std::size_t i = 0; i < d.rot.size(); ++i) d.rot[i] += rg.rot[i];
    for (int s : {0, 1}) {
      for (std::size_t i = 0; i < d.axes[s].size(); ++i) d.axes[s][i] += rg.axes[s][i];
      for (std::size_t i = 0; i < d.taus[s].size(); ++i) d.taus[s][i] += rg.taus[s][i];
    }
    for (std::size_t i = 0; i < d.trans.size(); ++i) d.trans[i] += rg.trans[i];
  }
}

}  // namespace

BatchGradients loss_gradients(const Model& model, std::span<const BatchItem> batch,
                              const TrainConfig& cfg) {
  cfg.validate();
  require(!batch.empty(), "loss_gradients: empty batch");
  const double inv_b = 1.0 / double(batch.size());
  const int threads = int(std::min<std::size_t>(std::size_t(cfg.threads), batch.size()));
  const std::size_t chunks = std::size_t(std::max(threads, 1));
  std::vector<GradientSet> locals(chunks);
  std::vector<double> losses(chunks, 0.0);
  parallel_for(batch.size(), threads, [&](std::size_t begin, std::size_t end, int tid) {
    Workspace ws;
    for (std::size_t i = begin; i < end; ++i) {
      losses[std::size_t(tid)] +=
          process_item(model, batch[i], cfg, inv_b, locals[std::size_t(tid)], ws);
    }
  });

  BatchGradients result;
  double loss_sum = 0.0;
  for (std::size_t tid = 0; tid < chunks; ++tid) {
    loss_sum += losses[tid];
    merge_into(result.grads, std::move(locals[tid]));
  }

  // Direction gradients were accumulated in unit space; convert once per
  // relation now that all contributions are merged.
  RelationUnits units;
  units.resize(model.cfg);
  const int d = model.cfg.d, two_n = model.cfg.two_n(), m = model.cfg.m,
            k = model.cfg.k;
  for (auto& [r, rg] : result.grads.relations) {
    normalize_relation(model, r, units);
    for (int slot = 0; slot < d * two_n; ++slot) {
      to_raw_space(
          std::span<double>(rg.rot.data() + std::size_t(slot) * k, std::size_t(k)),
          std::span<const double>(units.rot_units.data() + std::size_t(slot) * k,
                                  std::size_t(k)),
          units.rot_norms[std::size_t(slot)]);
    }
    for (int s : {0, 1}) {
      for (int slot = 0; slot < d * m; ++slot) {
        to_raw_space(
            std::span<double>(rg.axes[s].data() + std::size_t(slot) * k, std::size_t(k)),
            std::span<const double>(units.axis_units[s].data() + std::size_t(slot) * k,
                                    std::size_t(k)),
            units.axis_norms[s][std::size_t(slot)]);
      }
    }
  }

  if (cfg.lambda > 0.0) {
    const double c = 2.0 * cfg.lambda / double(model.cfg.num_entities);
    for (auto& [e, vec] : result.grads.entities) {
      const auto row = model.entity(e);
      for (std::size_t i = 0; i < vec.size(); ++i) vec[i] += c * row[i];
    }
  }

  result.loss = loss_sum * inv_b + regularization_term(model, cfg.lambda);
  return result;
}

// ---- optimizer --------------------------------------------------------------

OptimizerState OptimizerState::init(const ModelConfig& cfg, double beta1, double beta2,
                                    double eps) {
  cfg.validate();
  OptimizerState st;
  st.beta1 = beta1;
  st.beta2 = beta2;
  st.eps = eps;
  const auto sized = [](Moments& mo, std::size_t n) {
    mo.m.assign(n, 0.0);
    mo.v.assign(n, 0.0);
  };
  const std::size_t e_count = std::size_t(cfg.num_entities);
  const std::size_t r_count = std::size_t(cfg.num_relations);
  sized(st.entities, e_count * cfg.entity_stride());
  sized(st.rotations, r_count * cfg.rotation_stride());
  sized(st.axes_head, r_count * cfg.axis_stride());
  sized(st.axes_tail, r_count * cfg.axis_stride());
  sized(st.taus_head, r_count * cfg.tau_stride());
  sized(st.taus_tail, r_count * cfg.tau_stride());
  sized(st.translations, cfg.has_translation() ? r_count * cfg.entity_stride() : 0);
  st.decay_snapshot.assign(e_count, 1.0);
  return st;
}

namespace {

// Brings one entity row current on compound decay.
void settle_entity(Model& model, OptimizerState& st, std::int32_t e) {
  double& snap = st.decay_snapshot[std::size_t(e)];
  if (snap == st.cum_decay) return;
  const double ratio = st.cum_decay / snap;
  for (double& v : model.entity(e)) v *= ratio;
  snap = st.cum_decay;
}

void settle_all(Model& model, OptimizerState& st) {
  for (std::int32_t e = 0; e < model.cfg.num_entities; ++e) settle_entity(model, st, e);
}

// Multiplies the running decay product by this step's factor, flushing and
// resetting if the product would underflow.
void decay_tick(Model& model, OptimizerState& st, double lr, double lambda) {
  const double factor = 1.0 - 2.0 * lr * lambda / double(model.cfg.num_entities);
  if (!(factor > 0.0)) {
    throw std::invalid_argument("decay factor must stay positive; lower lr or lambda");
  }
  st.cum_decay *= factor;
  if (st.cum_decay < kDecayUnderflow) {
    settle_all(model, st);
    st.cum_decay = 1.0;
    std::fill(st.decay_snapshot.begin(), st.decay_snapshot.end(), 1.0);
  }
}

void adam_update_block(std::span<double> params, const std::vector<double>& grads,
                       Moments& mo, std::size_t offset, const OptimizerState& st,
                       double lr, double bc1, double bc2) {
  require(grads.size() == params.size(), "adam_step: gradient block size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    double& m = mo.m[offset + i];
    double& v = mo.v[offset + i];
    m = st.beta1 * m + (1.0 - st.beta1) * g;
    v = st.beta2 * v + (1.0 - st.beta2) * g * g;
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + st.eps);
  }
}

}  // namespace

void begin_decay_step(Model& model, OptimizerState& st, double lr, double lambda,
                      std::span<const std::int32_t> entity_rows) {
  if (lambda <= 0.0) return;
  if (st.tick_stamp != st.step) {
    throw std::logic_error("begin_decay_step: decay already advanced for this step");
  }
  decay_tick(model, st, lr, lambda);
  st.tick_stamp = st.step + 1;
  for (const std::int32_t e : entity_rows) {
    model.check_entity(e);
    settle_entity(model, st, e);
  }
}

void adam_step(Model& model, const GradientSet& grads, OptimizerState& st, double lr,
               double lambda) {
  require(lr > 0.0, "adam_step: lr must be > 0");
  require(lambda >= 0.0, "adam_step: lambda must be >= 0");
  st.step += 1;
  if (lambda > 0.0 && st.tick_stamp < st.step) {
    decay_tick(model, st, lr, lambda);
    st.tick_stamp = st.step;
  }
  const double bc1 = 1.0 - std::pow(st.beta1, double(st.step));
  const double bc2 = 1.0 - std::pow(st.beta2, double(st.step));
  const ModelConfig& cfg = model.cfg;
  for (const auto& [e, g] : grads.entities) {
    model.check_entity(e);
    if (lambda > 0.0) settle_entity(model, st, e);
    adam_update_block(model.entity(e), g, st.entities,
                      std::size_t(e) * cfg.entity_stride(), st, lr, bc1, bc2);
  }
  for (const auto& [r, rg] : grads.relations) {
    model.check_relation(r);
    adam_update_block(model.rotation(r), rg.rot, st.rotations,
                      std::size_t(r) * cfg.rotation_stride(), st, lr, bc1, bc2);
    if (cfg.m > 0) {
      adam_update_block(model.axes(r, Side::kHead), rg.axes[0], st.axes_head,
                        std::size_t(r) * cfg.axis_stride(), st, lr, bc1, bc2);
      adam_update_block(model.axes(r, Side::kTail), rg.axes[1], st.axes_tail,
                        std::size_t(r) * cfg.axis_stride(), st, lr, bc1, bc2);
      adam_update_block(model.taus(r, Side::kHead), rg.taus[0], st.taus_head,
                        std::size_t(r) * cfg.tau_stride(), st, lr, bc1, bc2);
      adam_update_block(model.taus(r, Side::kTail), rg.taus[1], st.taus_tail,
                        std::size_t(r) * cfg.tau_stride(), st, lr, bc1, bc2);
    }
    if (cfg.has_translation() && !rg.trans.empty()) {
      adam_update_block(model.translation(r), rg.trans, st.translations,
                        std::size_t(r) * cfg.entity_stride(), st, lr, bc1, bc2);
    }
  }
}

void flush_decay(Model& model, OptimizerState& st) { settle_all(model, st); }

// ---- training loop ----------------------------------------------------------

namespace {

void shuffle_indices(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = std::size_t(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

TrainResult train(Model model, const TripleStore& store, const TrainConfig& cfg,
                  std::ostream* log) {
  cfg.validate();
  model.cfg.validate();
  require(!store.train.empty(), "train: empty training split");

  const auto t0 = std::chrono::steady_clock::now();
  TrainResult result;
  result.model = std::move(model);
  result.final_lr = cfg.lr;
  Model& mdl = result.model;
  if (cfg.max_steps == 0) return result;

  OptimizerState state =
      OptimizerState::init(mdl.cfg, cfg.beta1, cfg.beta2, cfg.adam_eps);
  Rng rng(cfg.seed);
  const TripleSet train_set(store.train.begin(), store.train.end());
  const FilterIndex filter = FilterIndex::build(store);

  std::vector<std::size_t> order(store.train.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::size_t cursor = order.size();  // forces a shuffle at first use

  TrainConfig engine_cfg = cfg;
  engine_cfg.lambda = 0.0;  // regularization runs as decoupled decay instead

  double lr = cfg.lr;
  bool halved = false;
  int stall = 0;
  double loss_sum = 0.0;
  std::int64_t loss_count = 0;
  Model best;
  bool have_best = false;

  if (log) {
    *log << "step\tloss\tmr\tmrr\thits@1\thits@3\thits@10\tseconds\n";
  }

  std::vector<BatchItem> batch(std::size_t(cfg.batch_size));
  std::vector<std::int32_t> touched;
  for (std::int64_t step = 1; step <= cfg.max_steps; ++step) {
    touched.clear();
    for (int i = 0; i < cfg.batch_size; ++i) {
      if (cursor == order.size()) {
        shuffle_indices(order, rng);
        cursor = 0;
      }
      const Triple& pos = store.train[order[cursor++]];
      BatchItem& item = batch[std::size_t(i)];
      item.pos = pos;
      item.corrupt_side = (i % 2 == 0) ? Side::kHead : Side::kTail;
      item.negs = sample_negatives(pos, cfg.negatives, item.corrupt_side, rng, train_set,
                                   mdl.cfg.num_entities);
      touched.push_back(pos.h);
      touched.push_back(pos.t);
      for (const Triple& n : item.negs) {
        touched.push_back(item.corrupt_side == Side::kHead ? n.h : n.t);
      }
    }
    if (cfg.lambda > 0.0) {
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      begin_decay_step(mdl, state, lr, cfg.lambda, touched);
    }
    const BatchGradients bg = loss_gradients(mdl, batch, engine_cfg);
    adam_step(mdl, bg.grads, state, lr, cfg.lambda);
    loss_sum += bg.loss;
    ++loss_count;

    if (!store.valid.empty() &&
        (step % cfg.valid_every == 0 || step == cfg.max_steps)) {
      flush_decay(mdl, state);
      const MetricsReport rep = evaluate(mdl, store.valid, filter, cfg.threads);
      if (log) {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        *log << step << '\t' << loss_sum / double(loss_count) << '\t' << rep.mr << '\t'
             << rep.mrr << '\t' << rep.hits1 << '\t' << rep.hits3 << '\t' << rep.hits10
             << '\t' << secs << '\n';
        log->flush();
      }
      if (rep.mrr > result.best_valid_mrr) {
        result.best_valid_mrr = rep.mrr;
        result.best_step = step;
        best = mdl;
        have_best = true;
        stall = 0;
      } else if (++stall >= 3 && !halved) {
        lr *= 0.5;
        halved = true;
        stall = 0;
      }
      loss_sum = 0.0;
      loss_count = 0;
    }
  }

  flush_decay(mdl, state);
  result.steps_run = cfg.max_steps;
  result.final_lr = lr;
  if (have_best) result.model = std::move(best);
  return result;
}

}  // namespace house
