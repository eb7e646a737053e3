#include "house/householder.hpp"

#include <algorithm>
#include <cmath>

namespace house {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatchError(std::string(what) + ": dimensions " + std::to_string(a) +
                                 " and " + std::to_string(b) + " differ");
  }
}

}  // namespace

std::vector<double> UnitVector::normalized() const {
  std::vector<double> unit(raw.size());
  normalize(raw, unit);
  return unit;
}

std::size_t ReflectionChain::dim() const {
  if (vectors.empty()) return 0;
  const std::size_t k = vectors.front().dim();
  for (const auto& u : vectors) require_same_dim(u.dim(), k, "reflection chain");
  return k;
}

std::size_t ProjectionChain::dim() const {
  if (entries.empty()) return declared_dim;
  const std::size_t k = entries.front().axis.dim();
  for (const auto& e : entries) require_same_dim(e.axis.dim(), k, "projection chain");
  if (declared_dim != 0) require_same_dim(declared_dim, k, "projection chain declared dim");
  return k;
}

SquareMatrix SquareMatrix::identity(std::size_t size) {
  SquareMatrix m(size);
  for (std::size_t i = 0; i < size; ++i) m.at(i, i) = 1.0;
  return m;
}

std::vector<double> SquareMatrix::apply(std::span<const double> x) const {
  require_same_dim(x.size(), n, "matrix apply");
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * x[j];
    y[i] = s;
  }
  return y;
}

void reflect_unit(std::span<const double> u, std::span<double> x) {
  const double c = 2.0 * dot(x, u);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * u[i];
}

void project_unit(std::span<const double> p, double tau, std::span<double> x) {
  const double c = tau * dot(x, p);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * p[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double vector_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double normalize(std::span<const double> raw, std::span<double> unit) {
  require_same_dim(raw.size(), unit.size(), "normalize");
  const double nrm = vector_norm(raw);
  if (nrm < kDegenerateNorm) {
    throw DegenerateVectorError("cannot normalize vector with norm " + std::to_string(nrm));
  }
  const double inv = 1.0 / nrm;
  for (std::size_t i = 0; i < raw.size(); ++i) unit[i] = raw[i] * inv;
  return nrm;
}

std::vector<double> reflect(const UnitVector& u, std::span<const double> x) {
  require_same_dim(u.dim(), x.size(), "reflect");
  std::vector<double> unit(u.dim());
  normalize(u.raw, unit);
  std::vector<double> y(x.begin(), x.end());
  reflect_unit(unit, y);
  return y;
}

std::vector<double> project(const UnitVector& p, double tau, std::span<const double> x) {
  require_same_dim(p.dim(), x.size(), "project");
  std::vector<double> unit(p.dim());
  normalize(p.raw, unit);
  std::vector<double> y(x.begin(), x.end());
  project_unit(unit, tau, y);
  return y;
}

std::vector<double> apply_rotation_chain(const ReflectionChain& chain, std::span<const double> x) {
  const std::size_t k = chain.dim();
  if (!chain.vectors.empty()) require_same_dim(k, x.size(), "apply rotation chain");
  std::vector<double> y(x.begin(), x.end());
  std::vector<double> unit(x.size());
  for (const auto& u : chain.vectors) {
    normalize(u.raw, unit);
    reflect_unit(unit, y);
  }
  return y;
}

std::vector<double> apply_projection_chain(const ProjectionChain& chain,
                                           std::span<const double> x) {
  const std::size_t k = chain.dim();
  if (!chain.entries.empty()) require_same_dim(k, x.size(), "apply projection chain");
  std::vector<double> y(x.begin(), x.end());
  std::vector<double> unit(x.size());
  for (const auto& e : chain.entries) {
    normalize(e.axis.raw, unit);
    project_unit(unit, e.tau, y);
  }
  return y;
}

SquareMatrix materialize_rotation(const ReflectionChain& chain) {
  if (chain.vectors.empty()) {
    throw std::invalid_argument("materialize_rotation: empty chain");
  }
  if (chain.size() % 2 != 0) {
    throw std::invalid_argument(
        "materialize_rotation: odd chain length " + std::to_string(chain.size()) +
        " has determinant -1 and is not a rotation");
  }
  const std::size_t k = chain.dim();
  SquareMatrix m(k);
  std::vector<double> basis(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    basis.assign(k, 0.0);
    basis[j] = 1.0;
    const std::vector<double> col = apply_rotation_chain(chain, basis);
    for (std::size_t i = 0; i < k; ++i) m.at(i, j) = col[i];
  }
  return m;
}

SquareMatrix materialize_projection(const ProjectionChain& chain) {
  const std::size_t k = chain.dim();
  if (k == 0) {
    throw std::invalid_argument(
        "materialize_projection: empty chain with no declared dimension");
  }
  if (chain.entries.empty()) return SquareMatrix::identity(k);
  SquareMatrix m(k);
  std::vector<double> basis(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    basis.assign(k, 0.0);
    basis[j] = 1.0;
    const std::vector<double> col = apply_projection_chain(chain, basis);
    for (std::size_t i = 0; i < k; ++i) m.at(i, j) = col[i];
  }
  return m;
}

ReflectionChain invert_rotation_chain(const ReflectionChain& chain) {
  ReflectionChain inv;
  inv.vectors.assign(chain.vectors.rbegin(), chain.vectors.rend());
  return inv;
}

ProjectionChain invert_projection_chain(const ProjectionChain& chain) {
  for (const auto& e : chain.entries) {
    if (std::abs(e.tau - 1.0) <= kTauSingularTol) {
      throw NonInvertibleError("projection with tau = " + std::to_string(e.tau) +
                               " is singular and cannot be inverted");
    }
  }
  ProjectionChain inv;
  inv.entries.reserve(chain.entries.size());
  for (auto it = chain.entries.rbegin(); it != chain.entries.rend(); ++it) {
    inv.entries.push_back({it->axis, it->tau / (it->tau - 1.0)});
  }
  return inv;
}

double orthogonality_defect(const SquareMatrix& q) {
  const std::size_t n = q.n;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += q.at(r, i) * q.at(r, j);
      const double d = s - (i == j ? 1.0 : 0.0);
      sum += d * d;
    }
  }
  return std::sqrt(sum);
}

double determinant(const SquareMatrix& q) {
  const std::size_t n = q.n;
  std::vector<double> a = q.a;  // working copy, row-major
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(a[r * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best == 0.0) return 0.0;
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[pivot * n + j], a[col * n + j]);
      det = -det;
    }
    const double p = a[col * n + col];
    det *= p;
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / p;
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a[r * n + j] -= f * a[col * n + j];
    }
  }
  return det;
}

ReflectionChain decompose_rotation(const SquareMatrix& q) {
  const std::size_t k = q.n;
  if (k < 2) {
    throw std::invalid_argument("decompose_rotation: need at least a 2x2 matrix");
  }
  if (q.a.size() != k * k) {
    throw DimensionMismatchError("decompose_rotation: malformed matrix storage");
  }
  if (orthogonality_defect(q) >= 1e-8) {
    throw NotARotationError("matrix is not orthogonal within tolerance");
  }
  const double det = determinant(q);
  if (std::abs(det - 1.0) >= 1e-8) {
    throw NotARotationError("orthogonal matrix has determinant " + std::to_string(det) +
                            ", not +1");
  }

  // QR-style elimination: reflect column j onto the basis vector e_j. Each
  // applied reflection is recorded; their product (in application order)
  // maps Q to a diagonal of +/-1 entries, so Q itself is the reversed
  // product of the same reflections (each is its own inverse).
  std::vector<double> a = q.a;
  std::vector<std::vector<double>> used;
  std::vector<double> u(k);
  for (std::size_t j = 0; j + 1 < k; ++j) {
    // u = (a_j - e_j); columns of an orthogonal matrix are unit vectors, so
    // the subtraction is benign and a tiny norm means a_j is already e_j.
    double norm2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double d = a[i * k + j] - (i == j ? 1.0 : 0.0);
      u[i] = d;
      norm2 += d * d;
    }
    const double nrm = std::sqrt(norm2);
    if (nrm < kDegenerateNorm) continue;
    for (std::size_t i = 0; i < k; ++i) u[i] /= nrm;
    // A <- H(u) A, applied column by column.
    for (std::size_t c = 0; c < k; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += a[i * k + c] * u[i];
      s *= 2.0;
      for (std::size_t i = 0; i < k; ++i) a[i * k + c] -= s * u[i];
    }
    used.push_back(u);
  }

  ReflectionChain chain;
  // After elimination the matrix is diag(1, ..., 1, delta) with delta = +-1.
  // delta = -1 contributes one extra reflection H(e_k).
  if (a[(k - 1) * k + (k - 1)] < 0.0) {
    std::vector<double> ek(k, 0.0);
    ek[k - 1] = 1.0;
    chain.vectors.emplace_back(std::move(ek));
  }
  // H(u_m) ... H(u_1) Q = D means Q = H(u_1) ... H(u_m) D; the chain applies
  // index 0 first, so D's reflection (if any) goes first and the recorded
  // vectors follow in reverse order of use.
  for (auto it = used.rbegin(); it != used.rend(); ++it) {
    chain.vectors.emplace_back(std::move(*it));
  }

  // Pad to the fixed length 2 * floor(k/2) with repeated pairs: H(w)H(w) = I.
  // A determinant-(+1) input always yields an even count (each skipped column
  // was already e_j, and the trailing sign flip has the parity of the count),
  // so an odd count here means the tolerance checks let a non-rotation in.
  if (chain.vectors.size() % 2 != 0) {
    throw NotARotationError("decomposition produced an odd reflection count");
  }
  const std::size_t target = 2 * (k / 2);
  std::vector<double> pad(k, 0.0);
  pad[0] = 1.0;
  while (chain.vectors.size() < target) {
    chain.vectors.emplace_back(pad);
    chain.vectors.emplace_back(pad);
  }
  return chain;
}

}  // namespace house
