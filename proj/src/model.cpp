#include "house/model.hpp"

#include <cmath>
#include <stdexcept>

namespace house {

namespace {

// x (length k) <- chain of `count` unit vectors applied in storage order.
inline void apply_reflections(const double* units, int count, int k, double* x) {
  for (int j = 0; j < count; ++j) {
    const double* u = units + std::size_t(j) * k;
    double c = 0.0;
    for (int i = 0; i < k; ++i) c += x[i] * u[i];
    c *= 2.0;
    for (int i = 0; i < k; ++i) x[i] -= c * u[i];
  }
}

// x (length k) <- projection entries applied in storage order.
inline void apply_projections(const double* units, const double* taus, int m, int k,
                              double* x) {
  for (int j = 0; j < m; ++j) {
    const double* p = units + std::size_t(j) * k;
    double c = 0.0;
    for (int i = 0; i < k; ++i) c += x[i] * p[i];
    c *= taus[j];
    for (int i = 0; i < k; ++i) x[i] -= c * p[i];
  }
}

inline double row_distance(const double* a, const double* b, int k) {
  double s = 0.0;
  for (int i = 0; i < k; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Head-side transform of one row: projection (optional), rotation, then the
// optional translation. Everything reads from the normalized units view.
inline void transform_head_row(const Model& model, const RelationUnits& u, int r, int i,
                               double* x) {
  const int k = u.k;
  if (u.m > 0) {
    apply_projections(u.axis_units[0].data() + std::size_t(i) * u.m * k,
                      u.taus[0].data() + std::size_t(i) * u.m, u.m, k, x);
  }
  apply_reflections(u.rot_units.data() + std::size_t(i) * u.two_n * k, u.two_n, k, x);
  if (model.cfg.has_translation()) {
    const double* b = model.translations.data() + std::size_t(r) * model.cfg.entity_stride() +
                      std::size_t(i) * k;
    for (int c = 0; c < k; ++c) x[c] += b[c];
  }
}

inline void transform_tail_row(const RelationUnits& u, int i, double* x) {
  if (u.m > 0) {
    apply_projections(u.axis_units[1].data() + std::size_t(i) * u.m * u.k,
                      u.taus[1].data() + std::size_t(i) * u.m, u.m, u.k, x);
  }
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kHouseR: return "house_r";
    case Variant::kHouse: return "house";
    case Variant::kHouseRPlus: return "house_r_plus";
    case Variant::kHousePlus: return "house_plus";
  }
  return "unknown";
}

Variant variant_from_name(std::string_view name) {
  if (name == "house_r") return Variant::kHouseR;
  if (name == "house") return Variant::kHouse;
  if (name == "house_r_plus") return Variant::kHouseRPlus;
  if (name == "house_plus") return Variant::kHousePlus;
  throw std::invalid_argument("unknown model variant: " + std::string(name));
}

void ModelConfig::validate() const {
  if (d < 1) throw std::invalid_argument("model config: d must be >= 1");
  if (k < 2) throw std::invalid_argument("model config: k must be >= 2");
  if (m < 0) throw std::invalid_argument("model config: m must be >= 0");
  if (num_entities < 1) throw std::invalid_argument("model config: need at least one entity");
  if (num_relations < 1)
    throw std::invalid_argument("model config: need at least one relation");
  const bool rotation_only = variant == Variant::kHouseR || variant == Variant::kHouseRPlus;
  if (rotation_only && m != 0) {
    throw std::invalid_argument("model config: rotation-only variants require m = 0");
  }
}

std::span<double> Model::entity(int e) {
  check_entity(e);
  return {entities.data() + std::size_t(e) * cfg.entity_stride(), cfg.entity_stride()};
}
std::span<const double> Model::entity(int e) const {
  check_entity(e);
  return {entities.data() + std::size_t(e) * cfg.entity_stride(), cfg.entity_stride()};
}
std::span<double> Model::rotation(int r) {
  check_relation(r);
  return {rotations.data() + std::size_t(r) * cfg.rotation_stride(), cfg.rotation_stride()};
}
std::span<const double> Model::rotation(int r) const {
  check_relation(r);
  return {rotations.data() + std::size_t(r) * cfg.rotation_stride(), cfg.rotation_stride()};
}
std::span<double> Model::axes(int r, Side s) {
  check_relation(r);
  auto& v = s == Side::kHead ? axes_head : axes_tail;
  return {v.data() + std::size_t(r) * cfg.axis_stride(), cfg.axis_stride()};
}
std::span<const double> Model::axes(int r, Side s) const {
  check_relation(r);
  const auto& v = s == Side::kHead ? axes_head : axes_tail;
  return {v.data() + std::size_t(r) * cfg.axis_stride(), cfg.axis_stride()};
}
std::span<double> Model::taus(int r, Side s) {
  check_relation(r);
  auto& v = s == Side::kHead ? taus_head : taus_tail;
  return {v.data() + std::size_t(r) * cfg.tau_stride(), cfg.tau_stride()};
}
std::span<const double> Model::taus(int r, Side s) const {
  check_relation(r);
  const auto& v = s == Side::kHead ? taus_head : taus_tail;
  return {v.data() + std::size_t(r) * cfg.tau_stride(), cfg.tau_stride()};
}
std::span<double> Model::translation(int r) {
  check_relation(r);
  return {translations.data() + std::size_t(r) * cfg.entity_stride(), cfg.entity_stride()};
}
std::span<const double> Model::translation(int r) const {
  check_relation(r);
  return {translations.data() + std::size_t(r) * cfg.entity_stride(), cfg.entity_stride()};
}

void Model::check_entity(int e) const {
  if (e < 0 || e >= cfg.num_entities) {
    throw std::out_of_range("entity id " + std::to_string(e) + " out of range");
  }
}
void Model::check_relation(int r) const {
  if (r < 0 || r >= cfg.num_relations) {
    throw std::out_of_range("relation id " + std::to_string(r) + " out of range");
  }
}

Model init_parameters(const ModelConfig& cfg) {
  cfg.validate();
  Model model;
  model.cfg = cfg;
  const std::size_t ent_total = std::size_t(cfg.num_entities) * cfg.entity_stride();
  const std::size_t rot_total = std::size_t(cfg.num_relations) * cfg.rotation_stride();
  const std::size_t axis_total = std::size_t(cfg.num_relations) * cfg.axis_stride();
  const std::size_t tau_total = std::size_t(cfg.num_relations) * cfg.tau_stride();
  model.entities.resize(ent_total);
  model.rotations.resize(rot_total);
  model.axes_head.resize(axis_total);
  model.axes_tail.resize(axis_total);
  model.taus_head.resize(tau_total);
  model.taus_tail.resize(tau_total);
  if (cfg.has_translation()) {
    model.translations.assign(std::size_t(cfg.num_relations) * cfg.entity_stride(), 0.0);
  }

  Rng rng(cfg.seed);
  const double beta = (kDefaultMargin + 2.0) / (double(cfg.d) * cfg.k);
  for (auto& v : model.entities) v = rng.uniform(-beta, beta);
  // Relation draws happen relation-by-relation in storage order so that a
  // projection-free configuration consumes exactly the same stream prefix as
  // the rotation-only variant (they must initialize identically).
  for (int r = 0; r < cfg.num_relations; ++r) {
    double* rot = model.rotations.data() + std::size_t(r) * cfg.rotation_stride();
    for (std::size_t i = 0; i < cfg.rotation_stride(); ++i) rot[i] = rng.gaussian();
    if (cfg.m > 0) {
      double* ah = model.axes_head.data() + std::size_t(r) * cfg.axis_stride();
      for (std::size_t i = 0; i < cfg.axis_stride(); ++i) ah[i] = rng.gaussian();
      double* th = model.taus_head.data() + std::size_t(r) * cfg.tau_stride();
      for (std::size_t i = 0; i < cfg.tau_stride(); ++i) th[i] = rng.gaussian(0.0, 0.01);
      double* at = model.axes_tail.data() + std::size_t(r) * cfg.axis_stride();
      for (std::size_t i = 0; i < cfg.axis_stride(); ++i) at[i] = rng.gaussian();
      double* tt = model.taus_tail.data() + std::size_t(r) * cfg.tau_stride();
      for (std::size_t i = 0; i < cfg.tau_stride(); ++i) tt[i] = rng.gaussian(0.0, 0.01);
    }
  }
  return model;
}

void RelationUnits::resize(const ModelConfig& cfg) {
  d = cfg.d;
  two_n = cfg.two_n();
  m = cfg.m;
  k = cfg.k;
  rot_units.resize(cfg.rotation_stride());
  rot_norms.resize(std::size_t(d) * two_n);
  for (int s = 0; s < 2; ++s) {
    axis_units[s].resize(cfg.axis_stride());
    axis_norms[s].resize(std::size_t(d) * m);
    taus[s].resize(cfg.tau_stride());
  }
}

void normalize_relation(const Model& model, int r, RelationUnits& units) {
  model.check_relation(r);
  const ModelConfig& cfg = model.cfg;
  if (units.k != cfg.k || units.d != cfg.d || units.two_n != cfg.two_n() ||
      units.m != cfg.m) {
    units.resize(cfg);
  }
  const int k = cfg.k;
  const auto rot = model.rotation(r);
  for (std::size_t v = 0; v < units.rot_norms.size(); ++v) {
    units.rot_norms[v] = normalize(rot.subspan(v * k, k),
                                   std::span<double>(units.rot_units).subspan(v * k, k));
  }
  if (cfg.m > 0) {
    for (int s = 0; s < 2; ++s) {
      const Side side = s == 0 ? Side::kHead : Side::kTail;
      const auto axes = model.axes(r, side);
      for (std::size_t v = 0; v < units.axis_norms[s].size(); ++v) {
        units.axis_norms[s][v] =
            normalize(axes.subspan(v * k, k),
                      std::span<double>(units.axis_units[s]).subspan(v * k, k));
      }
      const auto taus = model.taus(r, side);
      std::copy(taus.begin(), taus.end(), units.taus[s].begin());
    }
  }
}

int repair_degenerate_rows(Model& model, int r, Rng& rng) {
  model.check_relation(r);
  const int k = model.cfg.k;
  int repaired = 0;
  auto fix = [&](std::span<double> raw) {
    for (std::size_t v = 0; v + k <= raw.size(); v += k) {
      double norm2 = 0.0;
      for (int i = 0; i < k; ++i) norm2 += raw[v + i] * raw[v + i];
      if (std::sqrt(norm2) < kDegenerateNorm) {
        for (int i = 0; i < k; ++i) raw[v + i] = rng.gaussian();
        ++repaired;
      }
    }
  };
  fix(model.rotation(r));
  if (model.cfg.m > 0) {
    fix(model.axes(r, Side::kHead));
    fix(model.axes(r, Side::kTail));
  }
  return repaired;
}

std::vector<double> project_entity(const Model& model, std::span<const double> s_e, int r,
                                   Side side) {
  model.check_relation(r);
  const ModelConfig& cfg = model.cfg;
  if (s_e.size() != cfg.entity_stride()) {
    throw DimensionMismatchError("project_entity: representation size mismatch");
  }
  std::vector<double> out(s_e.begin(), s_e.end());
  if (cfg.m == 0) return out;
  const int k = cfg.k;
  const auto axes = model.axes(r, side);
  const auto taus = model.taus(r, side);
  std::vector<double> unit(k);
  for (int i = 0; i < cfg.d; ++i) {
    double* x = out.data() + std::size_t(i) * k;
    for (int j = 0; j < cfg.m; ++j) {
      const auto raw = axes.subspan((std::size_t(i) * cfg.m + j) * k, k);
      normalize(raw, unit);
      double c = 0.0;
      for (int q = 0; q < k; ++q) c += x[q] * unit[q];
      c *= taus[std::size_t(i) * cfg.m + j];
      for (int q = 0; q < k; ++q) x[q] -= c * unit[q];
    }
  }
  return out;
}

std::vector<double> rotate_head(const Model& model, std::span<const double> s, int r) {
  model.check_relation(r);
  const ModelConfig& cfg = model.cfg;
  if (s.size() != cfg.entity_stride()) {
    throw DimensionMismatchError("rotate_head: representation size mismatch");
  }
  std::vector<double> out(s.begin(), s.end());
  const int k = cfg.k;
  const int two_n = cfg.two_n();
  const auto rot = model.rotation(r);
  std::vector<double> unit(k);
  for (int i = 0; i < cfg.d; ++i) {
    double* x = out.data() + std::size_t(i) * k;
    for (int j = 0; j < two_n; ++j) {
      const auto raw = rot.subspan((std::size_t(i) * two_n + j) * k, k);
      normalize(raw, unit);
      double c = 0.0;
      for (int q = 0; q < k; ++q) c += x[q] * unit[q];
      c *= 2.0;
      for (int q = 0; q < k; ++q) x[q] -= c * unit[q];
    }
  }
  return out;
}

double distance_with_units(const Model& model, const RelationUnits& units, int r, int h,
                           int t) {
  model.check_entity(h);
  model.check_entity(t);
  const ModelConfig& cfg = model.cfg;
  const int k = cfg.k;
  const double* sh = model.entities.data() + std::size_t(h) * cfg.entity_stride();
  const double* st = model.entities.data() + std::size_t(t) * cfg.entity_stride();
  std::vector<double> hrow(k), trow(k);
  double delta = 0.0;
  for (int i = 0; i < cfg.d; ++i) {
    std::copy_n(sh + std::size_t(i) * k, k, hrow.data());
    std::copy_n(st + std::size_t(i) * k, k, trow.data());
    transform_head_row(model, units, r, i, hrow.data());
    transform_tail_row(units, i, trow.data());
    delta += row_distance(hrow.data(), trow.data(), k);
  }
  return delta;
}

double distance(const Model& model, int h, int r, int t) {
  RelationUnits units;
  normalize_relation(model, r, units);
  return distance_with_units(model, units, r, h, t);
}

std::vector<double> score_candidates(const Model& model, int fixed, int r, Side side) {
  RelationUnits units;
  normalize_relation(model, r, units);
  std::vector<double> out(model.cfg.num_entities);
  score_candidates_into(model, units, r, fixed, side, out);
  return out;
}

void score_candidates_into(const Model& model, const RelationUnits& units, int r, int fixed,
                           Side side, std::span<double> out) {
  model.check_entity(fixed);
  model.check_relation(r);
  const ModelConfig& cfg = model.cfg;
  if (out.size() != std::size_t(cfg.num_entities)) {
    throw DimensionMismatchError("score_candidates: output size mismatch");
  }
  const int k = cfg.k;
  const int d = cfg.d;
  std::vector<double> fixed_rows(cfg.entity_stride());
  const double* sf = model.entities.data() + std::size_t(fixed) * cfg.entity_stride();
  std::copy_n(sf, cfg.entity_stride(), fixed_rows.data());
  if (side == Side::kHead) {
    // Candidates are heads; transform the fixed tail once.
    for (int i = 0; i < d; ++i) transform_tail_row(units, i, fixed_rows.data() + std::size_t(i) * k);
  } else {
    for (int i = 0; i < d; ++i) transform_head_row(model, units, r, i, fixed_rows.data() + std::size_t(i) * k);
  }
  std::vector<double> row(k);
  for (int j = 0; j < cfg.num_entities; ++j) {
    const double* sj = model.entities.data() + std::size_t(j) * cfg.entity_stride();
    double delta = 0.0;
    for (int i = 0; i < d; ++i) {
      std::copy_n(sj + std::size_t(i) * k, k, row.data());
      if (side == Side::kHead) {
        transform_head_row(model, units, r, i, row.data());
      } else {
        transform_tail_row(units, i, row.data());
      }
      delta += row_distance(row.data(), fixed_rows.data() + std::size_t(i) * k, k);
    }
    out[j] = delta;
  }
}

}  // namespace house
