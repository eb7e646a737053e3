#include "house/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "house/householder.hpp"
#include "house/rng.hpp"

namespace house {

namespace {

std::vector<double> gaussian_vector(Rng& rng, int k) {
  std::vector<double> v(static_cast<std::size_t>(k));
  for (double& x : v) x = rng.gaussian();
  return v;
}

ReflectionChain random_chain(Rng& rng, int k) {
  ReflectionChain chain;
  const int two_n = 2 * (k / 2);
  for (int i = 0; i < two_n; ++i) {
    chain.vectors.emplace_back(gaussian_vector(rng, k));
  }
  return chain;
}

ProjectionChain random_projection_chain(Rng& rng, int k, int len) {
  ProjectionChain chain;
  chain.declared_dim = std::size_t(k);
  for (int i = 0; i < len; ++i) {
    double tau = rng.uniform(-3.0, 3.0);
    while (std::fabs(tau - 1.0) < 1e-3) tau = rng.uniform(-3.0, 3.0);
    chain.entries.push_back({UnitVector(gaussian_vector(rng, k)), tau});
  }
  return chain;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::fabs(a[i] - b[i]));
  }
  return worst;
}

// Largest entrywise deviation of M from the identity.
double identity_defect(const SquareMatrix& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.n; ++j) {
      const double target = i == j ? 1.0 : 0.0;
      worst = std::max(worst, std::fabs(m.at(i, j) - target));
    }
  }
  return worst;
}

SquareMatrix matmul(const SquareMatrix& a, const SquareMatrix& b) {
  SquareMatrix c(a.n);
  for (std::size_t i = 0; i < a.n; ++i) {
    for (std::size_t l = 0; l < a.n; ++l) {
      const double v = a.at(i, l);
      if (v == 0.0) continue;
      for (std::size_t j = 0; j < a.n; ++j) c.at(i, j) += v * b.at(l, j);
    }
  }
  return c;
}

double frobenius_diff(const SquareMatrix& a, const SquareMatrix& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.a.size(); ++i) {
    const double d = a.a[i] - b.a[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

// Orthogonal pair spanning a random plane; H(u)H(v) with u perpendicular to v
// rotates that plane by pi, so the materialized rotation is an involution.
ReflectionChain involutive_chain(Rng& rng, int k) {
  std::vector<double> u = gaussian_vector(rng, k);
  std::vector<double> v;
  do {
    v = gaussian_vector(rng, k);
    const double uu = dot(u, u);
    const double uv = dot(u, v);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= uv / uu * u[i];
  } while (vector_norm(v) < 1e-6);
  ReflectionChain chain;
  chain.vectors.emplace_back(std::move(u));
  chain.vectors.emplace_back(std::move(v));
  const int two_n = 2 * (k / 2);
  while (int(chain.vectors.size()) < two_n) {
    const std::vector<double> w = gaussian_vector(rng, k);
    chain.vectors.emplace_back(w);
    chain.vectors.emplace_back(w);
  }
  return chain;
}

struct Property {
  const char* name;
  double tolerance;
  // Returns the defect for one trial (compared against tolerance).
  std::function<double(Rng&, int)> trial;
};

}  // namespace

std::vector<PropertyResult> run_property_suite(int k, int trials,
                                               std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("property suite: k must be >= 2");
  if (trials < 1) throw std::invalid_argument("property suite: trials must be >= 1");

  const std::vector<Property> properties = {
      {"rotation-orthogonality", 1e-9,
       [](Rng& rng, int dim) {
         const SquareMatrix q = materialize_rotation(random_chain(rng, dim));
         return std::max(orthogonality_defect(q), std::fabs(determinant(q) - 1.0));
       }},
      {"norm-preservation", 1e-10,
       [](Rng& rng, int dim) {
         const ReflectionChain c = random_chain(rng, dim);
         const std::vector<double> x = gaussian_vector(rng, dim);
         const std::vector<double> y = apply_rotation_chain(c, x);
         const double nx = vector_norm(x);
         return std::fabs(vector_norm(y) - nx) / std::max(nx, 1e-300);
       }},
      {"path-equivalence", 1e-10,
       [](Rng& rng, int dim) {
         const ReflectionChain c = random_chain(rng, dim);
         const std::vector<double> x = gaussian_vector(rng, dim);
         return max_abs_diff(apply_rotation_chain(c, x),
                             materialize_rotation(c).apply(x));
       }},
      {"reflection-involution", 1e-12,
       [](Rng& rng, int dim) {
         const UnitVector u(gaussian_vector(rng, dim));
         const std::vector<double> x = gaussian_vector(rng, dim);
         return max_abs_diff(reflect(u, reflect(u, x)), x);
       }},
      {"rotation-inverse", 1e-10,
       [](Rng& rng, int dim) {
         const ReflectionChain c = random_chain(rng, dim);
         const std::vector<double> x = gaussian_vector(rng, dim);
         return max_abs_diff(
             apply_rotation_chain(invert_rotation_chain(c),
                                  apply_rotation_chain(c, x)),
             x);
       }},
      {"projection-inverse", 1e-9,
       [](Rng& rng, int dim) {
         const ProjectionChain c =
             random_projection_chain(rng, dim, 1 + int(rng.below(3)));
         const SquareMatrix forward = materialize_projection(c);
         const SquareMatrix backward =
             materialize_projection(invert_projection_chain(c));
         return identity_defect(matmul(backward, forward));
       }},
      {"decomposition-round-trip", 1e-8,
       [](Rng& rng, int dim) {
         const SquareMatrix q = materialize_rotation(random_chain(rng, dim));
         const ReflectionChain back = decompose_rotation(q);
         if (int(back.size()) != 2 * (dim / 2)) return 1.0;  // wrong factor count
         return frobenius_diff(materialize_rotation(back), q);
       }},
      {"distance-change-law", 1e-9,
       [](Rng& rng, int dim) {
         const std::vector<double> a = gaussian_vector(rng, dim);
         const std::vector<double> b = gaussian_vector(rng, dim);
         const UnitVector p(gaussian_vector(rng, dim));
         double tau = rng.uniform(-3.0, 3.0);
         while (std::fabs(tau - 1.0) < 1e-3) tau = rng.uniform(-3.0, 3.0);
         const std::vector<double> pa = project(p, tau, a);
         const std::vector<double> pb = project(p, tau, b);
         std::vector<double> diff(a.size());
         for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
         const double s = vector_norm(diff);
         const std::vector<double> unit = p.normalized();
         const double cos_theta = s > 0.0 ? dot(diff, unit) / s : 0.0;
         std::vector<double> pdiff(a.size());
         for (std::size_t i = 0; i < a.size(); ++i) pdiff[i] = pa[i] - pb[i];
         const double lhs = dot(pdiff, pdiff);
         const double rhs =
             s * s + (tau * tau - 2.0 * tau) * s * s * cos_theta * cos_theta;
         return std::fabs(lhs - rhs) / std::max(1.0, s * s);
       }},
      {"involution-symmetry", 1e-10,
       [](Rng& rng, int dim) {
         const ReflectionChain c = involutive_chain(rng, dim);
         const SquareMatrix r = materialize_rotation(c);
         const std::vector<double> h = gaussian_vector(rng, dim);
         const std::vector<double> t = gaussian_vector(rng, dim);
         const std::vector<double> rh = r.apply(h);
         const std::vector<double> rt = r.apply(t);
         std::vector<double> fwd(h.size()), bwd(h.size());
         for (std::size_t i = 0; i < h.size(); ++i) {
           fwd[i] = rh[i] - t[i];
           bwd[i] = rt[i] - h[i];
         }
         const double scale = std::max(1.0, vector_norm(h) + vector_norm(t));
         return std::fabs(vector_norm(fwd) - vector_norm(bwd)) / scale;
       }},
  };

  std::vector<PropertyResult> results;
  results.reserve(properties.size());
  std::uint64_t salt = 0;
  for (const Property& prop : properties) {
    Rng rng(seed * 1000003 + ++salt);
    PropertyResult res;
    res.name = prop.name;
    res.trials = trials;
    res.tolerance = prop.tolerance;
    for (int t = 0; t < trials; ++t) {
      res.worst = std::max(res.worst, prop.trial(rng, k));
    }
    res.passed = res.worst <= prop.tolerance;
    results.push_back(std::move(res));
  }
  return results;
}

bool report_properties(std::ostream& out,
                       const std::vector<PropertyResult>& results) {
  bool all = true;
  for (const PropertyResult& r : results) {
    char line[160];
    std::snprintf(line, sizeof(line), "[%s] %-26s trials=%-6d worst=%.3e tol=%.0e",
                  r.passed ? "PASS" : "FAIL", r.name.c_str(), r.trials, r.worst,
                  r.tolerance);
    out << line << '\n';
    all = all && r.passed;
  }
  return all;
}

}  // namespace house
