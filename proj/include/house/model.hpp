#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "house/householder.hpp"
#include "house/rng.hpp"

namespace house {

// Model family. The *_R variants use rotations only (no projections); the
// *_PLUS variants add a learned per-relation translation after the rotation.
enum class Variant { kHouseR, kHouse, kHouseRPlus, kHousePlus };

const char* variant_name(Variant v);
Variant variant_from_name(std::string_view name);  // throws std::invalid_argument

// Which side of a triple a parameter set or ranking direction refers to.
enum class Side { kHead = 0, kTail = 1 };

// Default margin; also sets the entity init range beta = (margin + 2)/(d*k)
// so that initialization depends only on the model configuration.
inline constexpr double kDefaultMargin = 12.0;

struct ModelConfig {
  Variant variant = Variant::kHouse;
  int d = 1;           // embedding rows per entity
  int k = 2;           // rotation dimension (row length)
  int m = 0;           // projections per row and side; 0 disables projections
  int num_entities = 0;
  int num_relations = 0;
  std::uint64_t seed = 1;

  int n() const { return k / 2; }
  int two_n() const { return 2 * (k / 2); }
  bool has_translation() const {
    return variant == Variant::kHouseRPlus || variant == Variant::kHousePlus;
  }

  std::size_t entity_stride() const { return std::size_t(d) * k; }
  std::size_t rotation_stride() const { return std::size_t(d) * two_n() * k; }
  std::size_t axis_stride() const { return std::size_t(d) * m * k; }
  std::size_t tau_stride() const { return std::size_t(d) * m; }

  // Throws std::invalid_argument on out-of-range fields or a rotation-only
  // variant configured with m > 0.
  void validate() const;
};

// All learned parameters, stored as flat row-major arrays. Reflection and
// axis vectors are kept raw (unnormalized); normalization happens at
// application time.
struct Model {
  ModelConfig cfg;
  std::vector<double> entities;      // E x d x k
  std::vector<double> rotations;     // R x d x 2n x k
  std::vector<double> axes_head;     // R x d x m x k
  std::vector<double> axes_tail;     // R x d x m x k
  std::vector<double> taus_head;     // R x d x m
  std::vector<double> taus_tail;     // R x d x m
  std::vector<double> translations;  // R x d x k (PLUS variants only, else empty)

  std::span<double> entity(int e);
  std::span<const double> entity(int e) const;
  std::span<double> rotation(int r);
  std::span<const double> rotation(int r) const;
  std::span<double> axes(int r, Side s);
  std::span<const double> axes(int r, Side s) const;
  std::span<double> taus(int r, Side s);
  std::span<const double> taus(int r, Side s) const;
  std::span<double> translation(int r);
  std::span<const double> translation(int r) const;

  void check_entity(int e) const;    // throws std::out_of_range
  void check_relation(int r) const;  // throws std::out_of_range
};

// Allocates and fills all tables deterministically from cfg.seed:
// entity entries uniform in [-beta, beta] with beta = (kDefaultMargin+2)/(d*k),
// reflection/axis raw vectors standard Gaussian, taus Gaussian(0, 0.01^2)
// so initial projections start near the identity, translations zero.
Model init_parameters(const ModelConfig& cfg);

// Per-relation normalized view used by scoring and training hot paths: unit
// vectors plus the raw norms needed to push gradients back through the
// normalization.
struct RelationUnits {
  int d = 0, two_n = 0, m = 0, k = 0;
  std::vector<double> rot_units;         // d x 2n x k
  std::vector<double> rot_norms;         // d x 2n
  std::vector<double> axis_units[2];     // d x m x k per side
  std::vector<double> axis_norms[2];     // d x m per side
  std::vector<double> taus[2];           // d x m per side (copied raw values)

  void resize(const ModelConfig& cfg);
};

// Fills units from relation r's raw parameters. Throws DegenerateVectorError
// if any raw vector norm is below the degeneracy bound.
void normalize_relation(const Model& model, int r, RelationUnits& units);

// Replaces raw reflection/axis vectors of relation r whose norm falls below
// the degeneracy bound with fresh standard Gaussian draws. Returns how many
// rows were replaced.
int repair_degenerate_rows(Model& model, int r, Rng& rng);

// Row-wise projection of a d x k representation with relation r's chain for
// the given side; identity when m = 0.
std::vector<double> project_entity(const Model& model, std::span<const double> s_e, int r,
                                   Side side);

// Row-wise rotation of a (projected) d x k representation with relation r's
// reflection chains.
std::vector<double> rotate_head(const Model& model, std::span<const double> s, int r);

// Sum over rows of the Euclidean distance between the transformed head row
// and the projected tail row. PLUS variants add the relation translation to
// the head row after rotation.
double distance(const Model& model, int h, int r, int t);
double distance_with_units(const Model& model, const RelationUnits& units, int r, int h,
                           int t);

// Distances of every candidate entity against the fixed one. side selects
// what the candidates stand for: kHead scores distance(j, r, fixed), kTail
// scores distance(fixed, r, j). The fixed entity's transform is computed once.
std::vector<double> score_candidates(const Model& model, int fixed, int r, Side side);
void score_candidates_into(const Model& model, const RelationUnits& units, int r, int fixed,
                           Side side, std::span<double> out);

}  // namespace house
