#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace house {

// Raw vectors with Euclidean norm below this are considered degenerate:
// their direction is numerically meaningless, so normalization refuses them.
inline constexpr double kDegenerateNorm = 1e-12;

// A projection with |tau - 1| at or below this is treated as singular
// (tau = 1 collapses the axis component entirely and has no inverse).
inline constexpr double kTauSingularTol = 1e-9;

struct DimensionMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateVectorError : std::domain_error {
  using std::domain_error::domain_error;
};

struct NonInvertibleError : std::domain_error {
  using std::domain_error::domain_error;
};

struct NotARotationError : std::domain_error {
  using std::domain_error::domain_error;
};

// A reflection direction stored as a free (unnormalized) parameter vector.
// Normalization happens at application time so the raw entries can be
// optimized without any constraint.
struct UnitVector {
  std::vector<double> raw;

  UnitVector() = default;
  explicit UnitVector(std::vector<double> v) : raw(std::move(v)) {}

  std::size_t dim() const { return raw.size(); }

  // Unit-norm copy of raw. Throws DegenerateVectorError if ||raw|| < 1e-12.
  std::vector<double> normalized() const;
};

// An ordered product of reflections. vectors[0] is applied to the input
// first, vectors.back() last, i.e. the chain represents
// H(u_last) * ... * H(u_0).
struct ReflectionChain {
  std::vector<UnitVector> vectors;

  std::size_t size() const { return vectors.size(); }
  // Common dimension of the member vectors; throws DimensionMismatchError
  // if they disagree, and 0 for an empty chain.
  std::size_t dim() const;
};

struct ProjectionEntry {
  UnitVector axis;
  double tau = 0.0;
};

// An ordered product of axis projections I - tau * p p^T, applied in the
// same first-to-last order as ReflectionChain. A chain may be empty (the
// identity map); declared_dim carries the space dimension in that case.
struct ProjectionChain {
  std::vector<ProjectionEntry> entries;
  std::size_t declared_dim = 0;

  std::size_t size() const { return entries.size(); }
  std::size_t dim() const;
};

// Minimal dense row-major square matrix used for materialized operators.
struct SquareMatrix {
  std::size_t n = 0;
  std::vector<double> a;  // row-major, n * n entries

  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t size) : n(size), a(size * size, 0.0) {}

  static SquareMatrix identity(std::size_t size);

  double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  // y = M x
  std::vector<double> apply(std::span<const double> x) const;
};

// ---- low-level kernels (unit-norm direction assumed, no checks) ----

// x <- x - 2 <x,u> u
void reflect_unit(std::span<const double> u, std::span<double> x);
// x <- x - tau <x,p> p
void project_unit(std::span<const double> p, double tau, std::span<double> x);

double dot(std::span<const double> a, std::span<const double> b);
double vector_norm(std::span<const double> v);

// unit <- raw / ||raw||; returns ||raw||. Throws DegenerateVectorError when
// the norm is below kDegenerateNorm.
double normalize(std::span<const double> raw, std::span<double> unit);

// ---- checked operations on free-parameter vectors ----

// Householder reflection of x across the hyperplane orthogonal to u.
std::vector<double> reflect(const UnitVector& u, std::span<const double> x);

// Axis projection (I - tau * p p^T) x with p normalized from its raw form.
std::vector<double> project(const UnitVector& p, double tau, std::span<const double> x);

// Applies every reflection in order (vectors[0] first).
std::vector<double> apply_rotation_chain(const ReflectionChain& chain, std::span<const double> x);

// Applies every projection entry in order (entries[0] first).
std::vector<double> apply_projection_chain(const ProjectionChain& chain, std::span<const double> x);

// Dense matrix of the chain's action, built by applying the chain to the
// standard basis. Requires a nonempty chain of even length (an odd number
// of reflections has determinant -1 and is not a rotation).
SquareMatrix materialize_rotation(const ReflectionChain& chain);

// Dense matrix of the projection chain's action.
SquareMatrix materialize_projection(const ProjectionChain& chain);

// Chain whose action is the exact inverse: same vectors, reversed order.
ReflectionChain invert_rotation_chain(const ReflectionChain& chain);

// Reversed order with each tau replaced by tau / (tau - 1). Throws
// NonInvertibleError if any |tau - 1| <= kTauSingularTol.
ProjectionChain invert_projection_chain(const ProjectionChain& chain);

// Decomposes a rotation matrix into exactly 2 * floor(n/2) reflection
// vectors (padding with a repeated vector pair when the natural
// decomposition is shorter). Throws NotARotationError unless Q is
// orthogonal within 1e-8 (Frobenius) with determinant +1 within 1e-8.
ReflectionChain decompose_rotation(const SquareMatrix& q);

// Frobenius norm of Q^T Q - I; helper shared by validation and tests.
double orthogonality_defect(const SquareMatrix& q);

// Determinant via LU factorization with partial pivoting.
double determinant(const SquareMatrix& q);

}  // namespace house
