// Acceptance gate: one self-contained check per shipped guarantee, each
// printing a [PASS]/[FAIL]/[SKIP] line. Exits nonzero when any check fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "house/checkpoint.hpp"
#include "house/cli.hpp"
#include "house/dataset.hpp"
#include "house/evaluator.hpp"
#include "house/householder.hpp"
#include "house/model.hpp"
#include "house/rng.hpp"
#include "house/trainer.hpp"

namespace {

using namespace house;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status = Status::kPass;
  std::string detail;
};

Outcome pass(std::string detail) { return {Status::kPass, std::move(detail)}; }
Outcome fail(std::string detail) { return {Status::kFail, std::move(detail)}; }
Outcome skip(std::string detail) { return {Status::kSkip, std::move(detail)}; }

struct Timer {
  Clock::time_point t0 = Clock::now();
  double seconds() const {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  }
};

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// ---- shared numeric helpers --------------------------------------------------

std::vector<double> gaussian_vector(Rng& rng, int k) {
  std::vector<double> v(static_cast<std::size_t>(k));
  for (double& x : v) x = rng.gaussian();
  return v;
}

ReflectionChain random_chain(Rng& rng, int k) {
  ReflectionChain chain;
  const int two_n = 2 * (k / 2);
  for (int i = 0; i < two_n; ++i) chain.vectors.emplace_back(gaussian_vector(rng, k));
  return chain;
}

SquareMatrix matmul(const SquareMatrix& a, const SquareMatrix& b) {
  SquareMatrix c(a.n);
  for (std::size_t i = 0; i < a.n; ++i) {
    for (std::size_t l = 0; l < a.n; ++l) {
      const double v = a.at(i, l);
      for (std::size_t j = 0; j < a.n; ++j) c.at(i, j) += v * b.at(l, j);
    }
  }
  return c;
}

double identity_defect(const SquareMatrix& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.n; ++j) {
      worst = std::max(worst, std::fabs(m.at(i, j) - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

double frobenius_diff(const SquareMatrix& a, const SquareMatrix& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.a.size(); ++i) {
    const double d = a.a[i] - b.a[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

// Random rotation independent of the reflection-chain machinery:
// Gram-Schmidt orthogonalization of a Gaussian matrix, determinant fixed to +1.
SquareMatrix random_rotation_qr(Rng& rng, int k) {
  SquareMatrix q(static_cast<std::size_t>(k));
  for (int col = 0; col < k; ++col) {
    std::vector<double> v = gaussian_vector(rng, k);
    for (int prev = 0; prev < col; ++prev) {
      double proj = 0.0;
      for (int i = 0; i < k; ++i) proj += v[std::size_t(i)] * q.at(std::size_t(i), std::size_t(prev));
      for (int i = 0; i < k; ++i) v[std::size_t(i)] -= proj * q.at(std::size_t(i), std::size_t(prev));
    }
    const double nrm = vector_norm(v);
    if (nrm < 1e-8) return random_rotation_qr(rng, k);  // retry a degenerate draw
    for (int i = 0; i < k; ++i) q.at(std::size_t(i), std::size_t(col)) = v[std::size_t(i)] / nrm;
  }
  if (determinant(q) < 0.0) {
    for (int j = 0; j < k; ++j) q.at(0, std::size_t(j)) = -q.at(0, std::size_t(j));
  }
  return q;
}

// ---- criteria ----------------------------------------------------------------

Outcome rotation_validity() {
  Timer timer;
  Rng rng(101);
  double worst_orth = 0.0, worst_det = 0.0;
  for (int k = 2; k <= 12; ++k) {
    for (int trial = 0; trial < 1000; ++trial) {
      const SquareMatrix q = materialize_rotation(random_chain(rng, k));
      SquareMatrix qtq(q.n);
      for (std::size_t i = 0; i < q.n; ++i) {
        for (std::size_t j = 0; j < q.n; ++j) {
          double s = 0.0;
          for (std::size_t l = 0; l < q.n; ++l) s += q.at(l, i) * q.at(l, j);
          qtq.at(i, j) = s;
        }
      }
      worst_orth = std::max(worst_orth, identity_defect(qtq));
      worst_det = std::max(worst_det, std::fabs(determinant(q) - 1.0));
    }
  }
  const double secs = timer.seconds();
  const std::string detail =
      fmt("worst orthogonality %.2e, worst |det-1| %.2e over 11 dims x 1000 chains "
          "(%.1fs, limit 10s)",
          worst_orth, worst_det, secs);
  if (worst_orth > 1e-9 || worst_det > 1e-9) return fail(detail);
  if (secs >= 10.0) return fail(detail + " — too slow");
  return pass(detail);
}

Outcome decomposition_round_trip() {
  Timer timer;
  Rng rng(202);
  double worst = 0.0;
  for (int k = 2; k <= 8; ++k) {
    for (int trial = 0; trial < 200; ++trial) {
      const SquareMatrix q = trial % 2 == 0
                                 ? materialize_rotation(random_chain(rng, k))
                                 : random_rotation_qr(rng, k);
      const ReflectionChain chain = decompose_rotation(q);
      if (int(chain.size()) != 2 * (k / 2)) {
        return fail(fmt("k=%d produced %zu factors, expected %d", k, chain.size(),
                        2 * (k / 2)));
      }
      worst = std::max(worst, frobenius_diff(materialize_rotation(chain), q));
    }
  }
  const double secs = timer.seconds();
  const std::string detail = fmt(
      "worst round-trip %.2e over 7 dims x 200 rotations (%.1fs, limit 30s)", worst, secs);
  if (worst > 1e-8) return fail(detail);
  if (secs >= 30.0) return fail(detail + " — too slow");
  return pass(detail);
}

Outcome path_equivalence() {
  Rng rng(303);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int k = 2 + trial % 11;
    const ReflectionChain chain = random_chain(rng, k);
    const std::vector<double> x = gaussian_vector(rng, k);
    const std::vector<double> via_chain = apply_rotation_chain(chain, x);
    const std::vector<double> via_matrix = materialize_rotation(chain).apply(x);
    for (std::size_t i = 0; i < via_chain.size(); ++i) {
      worst = std::max(worst, std::fabs(via_chain[i] - via_matrix[i]));
    }
  }
  const std::string detail = fmt("worst component gap %.2e over 10000 pairs", worst);
  return worst <= 1e-10 ? pass(detail) : fail(detail);
}

Outcome projection_invertibility() {
  Rng rng(404);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int k = 2 + trial % 7;
    ProjectionChain chain;
    chain.declared_dim = std::size_t(k);
    const int len = 1 + int(rng.below(3));
    for (int i = 0; i < len; ++i) {
      double tau = rng.uniform(-3.0, 3.0);
      while (tau > 0.999 && tau < 1.001) tau = rng.uniform(-3.0, 3.0);
      chain.entries.push_back({UnitVector(gaussian_vector(rng, k)), tau});
    }
    const SquareMatrix product =
        matmul(materialize_projection(invert_projection_chain(chain)),
               materialize_projection(chain));
    worst = std::max(worst, identity_defect(product));
  }
  // The singular value must be rejected loudly, not inverted quietly.
  ProjectionChain singular;
  singular.declared_dim = 3;
  singular.entries.push_back({UnitVector({1.0, 2.0, -1.0}), 1.0});
  bool threw = false;
  try {
    (void)invert_projection_chain(singular);
  } catch (const NonInvertibleError&) {
    threw = true;
  }
  if (!threw) return fail("tau = 1 was inverted without raising an error");
  const std::string detail =
      fmt("worst inverse defect %.2e over 10000 chains; tau=1 raises", worst);
  return worst <= 1e-9 ? pass(detail) : fail(detail);
}

Outcome distance_change_law() {
  Rng rng(505);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int k = 2 + trial % 7;
    const std::vector<double> a = gaussian_vector(rng, k);
    const std::vector<double> b = gaussian_vector(rng, k);
    const UnitVector p(gaussian_vector(rng, k));
    const double tau = rng.uniform(-3.0, 3.0);
    const std::vector<double> pa = project(p, tau, a);
    const std::vector<double> pb = project(p, tau, b);
    std::vector<double> diff(a.size()), pdiff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      diff[i] = a[i] - b[i];
      pdiff[i] = pa[i] - pb[i];
    }
    const double s = vector_norm(diff);
    const std::vector<double> unit = p.normalized();
    const double cos_theta = s > 0.0 ? dot(diff, unit) / s : 0.0;
    const double lhs = dot(pdiff, pdiff);
    const double rhs = s * s + (tau * tau - 2.0 * tau) * s * s * cos_theta * cos_theta;
    worst = std::max(worst, std::fabs(lhs - rhs) / std::max(1.0, s * s));
  }
  const std::string detail = fmt("worst law violation %.2e over 10000 samples", worst);
  return worst <= 1e-9 ? pass(detail) : fail(detail);
}

// Frozen-weight batch loss via the independent distance() path (see the unit
// suite for the same construction with commentary).
double reference_loss(const Model& model, const std::vector<BatchItem>& batch,
                      const std::vector<std::vector<double>>& frozen_weights,
                      double gamma, double lambda) {
  double total = 0.0;
  std::vector<double> neg_ds;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const BatchItem& item = batch[i];
    const double pos_d = distance(model, item.pos.h, item.pos.r, item.pos.t);
    neg_ds.clear();
    for (const Triple& n : item.negs) neg_ds.push_back(distance(model, n.h, n.r, n.t));
    total += loss_value(pos_d, neg_ds, frozen_weights[i], gamma, 0.0);
  }
  return total / double(batch.size()) + regularization_term(model, lambda);
}

Outcome gradient_check() {
  Timer timer;
  const Variant variants[4] = {Variant::kHouseR, Variant::kHouse,
                               Variant::kHouseRPlus, Variant::kHousePlus};
  Rng pick(606);
  const double h = 1e-6;
  long checked = 0;
  long strict_checked = 0;
  double worst_rel = 0.0;    // over well-scaled coordinates (|g| >= 1e-3)
  double worst_mixed = 0.0;  // err / (1e-4 * scale + 1e-7) over all coordinates
  for (int cc = 0; cc < 100; ++cc) {
    const Variant variant = variants[cc % 4];
    const bool rot_only = variant == Variant::kHouseR || variant == Variant::kHouseRPlus;
    ModelConfig mc;
    mc.variant = variant;
    mc.d = 1 + int(pick.below(3));
    mc.k = 2 + int(pick.below(5));
    mc.m = rot_only ? 0 : int(pick.below(3));
    mc.num_entities = 6 + int(pick.below(5));
    mc.num_relations = 1 + int(pick.below(2));
    mc.seed = 900 + std::uint64_t(cc);
    Model model = init_parameters(mc);
    if (mc.has_translation()) {
      Rng tr(7 + std::uint64_t(cc));
      for (int r = 0; r < mc.num_relations; ++r) {
        for (double& v : model.translation(r)) v = tr.gaussian(0.0, 0.2);
      }
    }

    TrainConfig cfg;
    cfg.batch_size = 2 + int(pick.below(2));
    cfg.negatives = 1 + int(pick.below(4));
    cfg.alpha = (cc % 2 == 0) ? 0.5 : 1.5;
    cfg.gamma = (cc % 2 == 0) ? 2.0 : 1.0;
    cfg.lambda = (cc % 3 == 0) ? 0.2 : 0.0;

    Rng brng(7000 + std::uint64_t(cc));
    const TripleSet empty;
    std::vector<BatchItem> batch(std::size_t(cfg.batch_size));
    for (int i = 0; i < cfg.batch_size; ++i) {
      BatchItem& item = batch[std::size_t(i)];
      item.pos = Triple{std::int32_t(brng.below(std::uint64_t(mc.num_entities))),
                        std::int32_t(brng.below(std::uint64_t(mc.num_relations))),
                        std::int32_t(brng.below(std::uint64_t(mc.num_entities)))};
      item.corrupt_side = (i % 2 == 0) ? Side::kHead : Side::kTail;
      item.negs = sample_negatives(item.pos, cfg.negatives, item.corrupt_side, brng,
                                   empty, mc.num_entities);
    }

    const BatchGradients bg = loss_gradients(model, batch, cfg);
    std::vector<std::vector<double>> frozen(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      std::vector<double> nd;
      for (const Triple& n : batch[i].negs) nd.push_back(distance(model, n.h, n.r, n.t));
      frozen[i] = adversarial_weights(nd, cfg.alpha);
    }
    const auto f = [&](const Model& mm) {
      return reference_loss(mm, batch, frozen, cfg.gamma, cfg.lambda);
    };
    const auto check = [&](double analytic, const std::function<void(Model&, double)>& mut) {
      Model plus = model;
      mut(plus, h);
      Model minus = model;
      mut(minus, -h);
      const double fd = (f(plus) - f(minus)) / (2.0 * h);
      const double scale = std::max(std::fabs(analytic), std::fabs(fd));
      const double err = std::fabs(analytic - fd);
      ++checked;
      worst_mixed = std::max(worst_mixed, err / (1e-4 * scale + 1e-7));
      if (scale >= 1e-3) {
        ++strict_checked;
        worst_rel = std::max(worst_rel, err / scale);
      }
    };

    for (const auto& [e, g] : bg.grads.entities) {
      const std::size_t base = std::size_t(e) * mc.entity_stride();
      for (std::size_t i = 0; i < g.size(); ++i) {
        check(g[i], [&](Model& mm, double dx) { mm.entities[base + i] += dx; });
      }
    }
    for (const auto& [r, rg] : bg.grads.relations) {
      const std::size_t rot_base = std::size_t(r) * mc.rotation_stride();
      for (std::size_t i = 0; i < rg.rot.size(); ++i) {
        check(rg.rot[i], [&](Model& mm, double dx) { mm.rotations[rot_base + i] += dx; });
      }
      const std::size_t ax_base = std::size_t(r) * mc.axis_stride();
      const std::size_t tau_base = std::size_t(r) * mc.tau_stride();
      for (int s : {0, 1}) {
        for (std::size_t i = 0; i < rg.axes[s].size(); ++i) {
          check(rg.axes[s][i], [&](Model& mm, double dx) {
            (s == 0 ? mm.axes_head : mm.axes_tail)[ax_base + i] += dx;
          });
        }
        for (std::size_t i = 0; i < rg.taus[s].size(); ++i) {
          check(rg.taus[s][i], [&](Model& mm, double dx) {
            (s == 0 ? mm.taus_head : mm.taus_tail)[tau_base + i] += dx;
          });
        }
      }
      const std::size_t tr_base = std::size_t(r) * mc.entity_stride();
      for (std::size_t i = 0; i < rg.trans.size(); ++i) {
        check(rg.trans[i],
              [&](Model& mm, double dx) { mm.translations[tr_base + i] += dx; });
      }
    }
  }
  const double secs = timer.seconds();
  const std::string detail =
      fmt("worst relative error %.2e on %ld well-scaled of %ld coordinates, "
          "absolute floor 1e-7 honored (x%.2f) over 100 configs (%.1fs, limit 120s)",
          worst_rel, strict_checked, checked, worst_mixed, secs);
  if (worst_rel >= 1e-4) return fail(detail);
  if (worst_mixed >= 1.0) return fail(detail);
  if (strict_checked < 1000) return fail(detail + " — too few well-scaled coordinates");
  if (secs >= 120.0) return fail(detail + " — too slow");
  return pass(detail);
}

Outcome loss_spot_values() {
  const double ln2_gap = std::fabs(loss_value(12.0, {}, {}, 12.0, 0.0) - std::log(2.0));
  const auto w = adversarial_weights(std::vector<double>{1.0, 2.0}, 1.0);
  const double w0_gap = std::fabs(w[0] - 0.7311);
  const double w1_gap = std::fabs(w[1] - 0.2689);
  const std::string detail = fmt(
      "margin-loss vs ln 2 gap %.2e (tol 1e-12); weights (%.6f, %.6f) vs (0.7311, "
      "0.2689) within 1e-4",
      ln2_gap, w[0], w[1]);
  if (ln2_gap > 1e-12 || w0_gap > 1e-4 || w1_gap > 1e-4) return fail(detail);
  return pass(detail);
}

// Shared by the two behavioral checks: train one variant on one KG and report
// test metrics of the best-validation model.
MetricsReport train_and_test(const SyntheticKg& kg, Variant variant, int d, int k,
                             int m, const TrainConfig& cfg) {
  ModelConfig mc;
  mc.variant = variant;
  mc.d = d;
  mc.k = k;
  mc.m = m;
  mc.num_entities = kg.vocab.num_entities();
  mc.num_relations = kg.vocab.num_relations();
  mc.seed = cfg.seed;
  const TrainResult res = train(init_parameters(mc), kg.store, cfg);
  const FilterIndex filter = FilterIndex::build(kg.store);
  return evaluate(res.model, kg.store.test, filter, 1);
}

Outcome pattern_learning() {
  Timer timer;
  PatternMix mix;
  mix.symmetric_pairs = 20;
  mix.antisymmetric_edges = 10;
  mix.inverse_pairs = 20;
  mix.composition_chains = 20;
  mix.n_to_one_groups = 3;
  mix.n_to_one_heads = 3;
  mix.heldout_fraction = 0.35;
  const SyntheticKg kg = generate_pattern_kg(50, mix, 7);

  TrainConfig cfg;
  cfg.batch_size = 64;
  cfg.negatives = 8;
  cfg.alpha = 2.0;
  cfg.gamma = 6.0;
  cfg.lr = 0.05;
  cfg.lambda = 0.0;
  cfg.max_steps = 12000;
  cfg.valid_every = 500;
  cfg.seed = 2;
  cfg.threads = 1;
  const MetricsReport r = train_and_test(kg, Variant::kHouse, 5, 4, 1, cfg);
  const double secs = timer.seconds();
  const std::string detail =
      fmt("filtered Hits@1 %.3f on %lld held-out implied queries (need >= 0.9; %.0fs, "
          "limit 300s)",
          r.hits1, (long long)r.count, secs);
  if (r.hits1 < 0.9) return fail(detail);
  if (secs >= 300.0) return fail(detail + " — too slow");
  return pass(detail);
}

Outcome rmp_advantage() {
  Timer timer;
  // Many heads funneling into one tail per group, with symmetric edges drawn
  // between those heads: collapsing the heads satisfies the funnel but erases
  // the separation the symmetric queries need. Distance-preserving rotations
  // face that trade-off directly; per-relation projections relieve it.
  PatternMix mix;
  mix.symmetric_pairs = 36;
  mix.antisymmetric_edges = 2;
  mix.inverse_pairs = 2;
  mix.composition_chains = 2;
  mix.n_to_one_groups = 6;
  mix.n_to_one_heads = 12;
  mix.heldout_fraction = 0.6;
  mix.symmetric_pairs_among_n_to_one_heads = true;

  TrainConfig cfg;
  cfg.batch_size = 32;
  cfg.negatives = 16;
  cfg.alpha = 3.0;
  cfg.gamma = 1.0;
  cfg.lr = 0.05;
  cfg.lambda = 0.0;
  cfg.max_steps = 8000;
  cfg.valid_every = 500;
  cfg.threads = 1;

  double sum_house = 0.0, sum_rot = 0.0;
  std::string per_seed;
  for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const SyntheticKg kg = generate_pattern_kg(50, mix, seed);
    cfg.seed = seed;
    const MetricsReport with_proj = train_and_test(kg, Variant::kHouse, 1, 6, 1, cfg);
    const MetricsReport rot_only = train_and_test(kg, Variant::kHouseR, 1, 6, 0, cfg);
    sum_house += with_proj.mrr;
    sum_rot += rot_only.mrr;
    per_seed += fmt(" [seed %llu: %.3f vs %.3f]", (unsigned long long)seed,
                    with_proj.mrr, rot_only.mrr);
  }
  const double gap = (sum_house - sum_rot) / 3.0;
  const double secs = timer.seconds();
  const std::string detail =
      fmt("projection-vs-rotation mean test MRR gap %.3f (need >= 0.05)%s (%.0fs)", gap,
          per_seed.c_str(), secs);
  return gap >= 0.05 ? pass(detail) : fail(detail);
}

Outcome desk_benchmark(const fs::path& data_root) {
  const fs::path dir = data_root / "wn18rr";
  if (!fs::exists(dir / "train.txt")) {
    return skip("benchmark dataset not present: " + dir.string() +
                " (network-isolated environment; no dataset mirror available)");
  }
  Timer timer;
  const Dataset ds = load_dataset(dir);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());

  TrainConfig cfg;
  cfg.batch_size = 512;
  cfg.negatives = 32;
  cfg.alpha = 1.0;
  cfg.gamma = 6.0;
  cfg.lr = 3e-3;
  cfg.lambda = 0.0;
  cfg.max_steps = 100000;
  cfg.valid_every = 10000;
  cfg.seed = 1;
  cfg.threads = int(hw);

  const auto run_variant = [&](Variant variant, int m) {
    ModelConfig mc;
    mc.variant = variant;
    mc.d = 50;
    mc.k = 4;
    mc.m = m;
    mc.num_entities = ds.vocab.num_entities();
    mc.num_relations = ds.vocab.num_relations();
    mc.seed = cfg.seed;
    const TrainResult res = train(init_parameters(mc), ds.store, cfg);
    const FilterIndex filter = FilterIndex::build(ds.store);
    return evaluate(res.model, ds.store.test, filter, cfg.threads);
  };
  const MetricsReport full = run_variant(Variant::kHouse, 1);
  const MetricsReport rot = run_variant(Variant::kHouseR, 0);
  const double secs = timer.seconds();
  const std::string detail =
      fmt("test MRR %.3f (need >= 0.40), Hits@10 %.3f (need >= 0.50), rotation-only "
          "MRR %.3f (must be lower), %.0fs (limit 7200s)",
          full.mrr, full.hits10, rot.mrr, secs);
  if (full.mrr < 0.40 || full.hits10 < 0.50) return fail(detail);
  if (full.mrr <= rot.mrr) return fail(detail);
  if (secs >= 7200.0) return fail(detail + " — too slow");
  return pass(detail);
}

Outcome dataset_fidelity(const fs::path& data_root) {
  struct Expected {
    const char* name;
    int entities, relations;
    std::size_t train, valid, test;
  };
  const Expected tables[] = {
      {"wn18rr", 40943, 11, 86835, 3034, 3134},
      {"fb15k-237", 14541, 237, 272115, 17535, 20466},
      {"wn18", 40943, 18, 141442, 5000, 5000},
      {"fb15k", 14951, 1345, 483142, 50000, 59071},
      {"yago3-10", 123182, 37, 1079040, 5000, 5000},
  };
  int present = 0;
  std::string detail;
  bool ok = true;
  for (const Expected& x : tables) {
    const fs::path dir = data_root / x.name;
    if (!fs::exists(dir / "train.txt")) continue;
    ++present;
    const Dataset ds = load_dataset(dir);
    const bool match = ds.vocab.num_entities() == x.entities &&
                       ds.vocab.num_relations() == x.relations &&
                       ds.store.train.size() == x.train &&
                       ds.store.valid.size() == x.valid && ds.store.test.size() == x.test;
    ok = ok && match;
    detail += fmt(" [%s: %d/%d/%zu/%zu/%zu %s]", x.name, ds.vocab.num_entities(),
                  ds.vocab.num_relations(), ds.store.train.size(), ds.store.valid.size(),
                  ds.store.test.size(), match ? "ok" : "MISMATCH");
  }
  if (present == 0) {
    return skip("no benchmark datasets present under " + data_root.string() +
                " (network-isolated environment; no dataset mirror available)");
  }
  const std::string summary = fmt("%d dataset(s) checked:%s", present, detail.c_str());
  return ok ? pass(summary) : fail(summary);
}

Outcome checkpoint_determinism() {
  const fs::path base = fs::temp_directory_path() / "housekg_acceptance_det";
  fs::remove_all(base);
  const fs::path data_dir = base / "data";
  std::ostringstream sink_out, sink_err;
  {
    const RunSpec synth = parse_run_spec(
        {"gen-synth", "--entities", "30", "--out", data_dir.string(), "--seed", "5"});
    if (run(synth, sink_out, sink_err) != 0) return fail("synthetic dataset write failed");
  }
  const auto run_once = [&](const std::string& tag) -> std::string {
    const fs::path dir = base / tag;
    const RunSpec spec = parse_run_spec(
        {"train", "--data", data_dir.string(), "--d", "3", "--k", "4", "--m", "1",
         "--b", "16", "--l", "4", "--gamma", "6", "--lr", "0.05", "--lambda", "0.01",
         "--max-steps", "150", "--valid-every", "50", "--threads", "1", "--seed", "42",
         "--out", dir.string()});
    if (run(spec, sink_out, sink_err) != 0) return {};
    std::ifstream f(dir / "model.ckpt", std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  const std::string a = run_once("a");
  const std::string b = run_once("b");
  fs::remove_all(base);
  if (a.empty() || b.empty()) return fail("training run failed");
  const std::string detail =
      fmt("two identical single-threaded runs, %zu checkpoint bytes each: %s", a.size(),
          a == b ? "bitwise equal" : "DIFFER");
  return a == b ? pass(detail) : fail(detail);
}

}  // namespace

int main(int argc, char** argv) {
  fs::path data_root = "data";
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--data-root" && i + 1 < argc) {
      data_root = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--data-root DIR] [--only N]\n";
      return 2;
    }
  }

  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "rotation chains materialize to orthogonal matrices with det +1",
       rotation_validity},
      {2, "rotations decompose into exactly 2*floor(k/2) reflections and back",
       decomposition_round_trip},
      {3, "sequential chain application equals the materialized matrix",
       path_equivalence},
      {4, "projection chains invert exactly away from the tau = 1 singularity",
       projection_invertibility},
      {5, "projection distance-change law holds", distance_change_law},
      {6, "analytic gradients match central finite differences", gradient_check},
      {7, "margin-loss and adversarial-weight spot values", loss_spot_values},
      {8, "pattern KG: held-out implied triples are recovered", pattern_learning},
      {9, "projections beat rotation-only on an N-to-1-dominated KG", rmp_advantage},
      {10, "desk-scale benchmark quality bar",
       [&] { return desk_benchmark(data_root); }},
      {11, "benchmark dataset statistics load exactly",
       [&] { return dataset_fidelity(data_root); }},
      {12, "identical run specifications give bitwise-identical checkpoints",
       checkpoint_determinism},
  };

  int passed = 0, failed = 0, skipped = 0;
  std::cout << "== acceptance: " << criteria.size()
            << " criteria, data root: " << data_root.string() << " ==\n";
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = fail(std::string("unexpected exception: ") + e.what());
    }
    const char* tag = o.status == Status::kPass   ? "PASS"
                      : o.status == Status::kFail ? "FAIL"
                                                  : "SKIP";
    std::printf("[%s] %2d. %s — %s\n", tag, c.id, c.title, o.detail.c_str());
    std::fflush(stdout);
    if (o.status == Status::kPass) ++passed;
    if (o.status == Status::kFail) ++failed;
    if (o.status == Status::kSkip) ++skipped;
  }
  std::cout << "== result: " << passed << " passed, " << failed << " failed, " << skipped
            << " skipped ==\n";
  return failed == 0 ? 0 : 1;
}
