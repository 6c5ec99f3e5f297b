// Test-only oracles: dense matrix construction, Gaussian elimination, and a
// cyclic Jacobi eigensolver. These stay independent of the operator code in
// core so that stencils, resolvents, and flows are checked against a second
// computational route.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tfe/grid.hpp"
#include "tfe/presets.hpp"
#include "tfe/rng.hpp"

namespace tfe::test {

using Matrix = std::vector<std::vector<double>>;

// Reflecting-stencil Laplacian assembled entry by entry from neighbor rules.
inline Matrix dense_neumann_matrix(const Grid& g) {
  const int m = g.cells();
  const double inv_h2 = 1.0 / (g.h * g.h);
  Matrix a(static_cast<size_t>(m), std::vector<double>(static_cast<size_t>(m), 0.0));
  auto link = [&](int i, int j) {
    a[i][j] += inv_h2;
    a[i][i] -= inv_h2;
  };
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i) {
      if (i > 0) link(i, i - 1);
      if (i < g.n - 1) link(i, i + 1);
    }
  } else {
    for (int iy = 0; iy < g.n; ++iy) {
      for (int ix = 0; ix < g.n; ++ix) {
        const int k = iy * g.n + ix;
        if (ix > 0) link(k, k - 1);
        if (ix < g.n - 1) link(k, k + 1);
        if (iy > 0) link(k, k - g.n);
        if (iy < g.n - 1) link(k, k + g.n);
      }
    }
  }
  return a;
}

inline std::vector<double> mat_apply(const Matrix& a, const std::vector<double>& x) {
  const size_t m = a.size();
  std::vector<double> y(m, 0.0);
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < m; ++j) y[i] += a[i][j] * x[j];
  return y;
}

inline Matrix mat_mul(const Matrix& a, const Matrix& b) {
  const size_t m = a.size();
  Matrix c(m, std::vector<double>(m, 0.0));
  for (size_t i = 0; i < m; ++i)
    for (size_t k = 0; k < m; ++k) {
      const double aik = a[i][k];
      if (aik == 0.0) continue;
      for (size_t j = 0; j < m; ++j) c[i][j] += aik * b[k][j];
    }
  return c;
}

// partial-pivot Gaussian elimination
inline std::vector<double> dense_solve(Matrix a, std::vector<double> b) {
  const size_t m = a.size();
  for (size_t col = 0; col < m; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < m; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < 1e-300) throw std::runtime_error("dense_solve: singular");
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (size_t r = col + 1; r < m; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (size_t j = col; j < m; ++j) a[r][j] -= f * a[col][j];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(m, 0.0);
  for (size_t i = m; i-- > 0;) {
    double s = b[i];
    for (size_t j = i + 1; j < m; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

// cyclic Jacobi for symmetric matrices; returns eigenvalues and column
// eigenvectors (v[i][k] = component i of eigenvector k)
inline void jacobi_eigen(Matrix a, Matrix& v, std::vector<double>& eig) {
  const size_t m = a.size();
  v.assign(m, std::vector<double>(m, 0.0));
  for (size_t i = 0; i < m; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < m; ++p)
      for (size_t q = p + 1; q < m; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-24) break;
    for (size_t p = 0; p < m; ++p) {
      for (size_t q = p + 1; q < m; ++q) {
        if (std::fabs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (size_t k = 0; k < m; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (size_t k = 0; k < m; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (size_t k = 0; k < m; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  eig.resize(m);
  for (size_t i = 0; i < m; ++i) eig[i] = a[i][i];
}

// exp(-L^2 t) u0 through the eigendecomposition of the dense symmetric L
inline std::vector<double> dense_biharmonic_flow(const Matrix& lap, double t,
                                                 const std::vector<double>& u0) {
  Matrix v;
  std::vector<double> eig;
  jacobi_eigen(lap, v, eig);
  const size_t m = u0.size();
  std::vector<double> coef(m, 0.0);
  for (size_t k = 0; k < m; ++k)
    for (size_t i = 0; i < m; ++i) coef[k] += v[i][k] * u0[i];
  std::vector<double> out(m, 0.0);
  for (size_t k = 0; k < m; ++k) {
    const double decay = std::exp(-eig[k] * eig[k] * t) * coef[k];
    for (size_t i = 0; i < m; ++i) out[i] += v[i][k] * decay;
  }
  return out;
}

inline Field field_from(const Grid& g, const std::vector<double>& vals) {
  Field f(g);
  f.values = vals;
  return f;
}

// iid per-cell noise, mean-removed; rough (large Laplacian) by construction
inline Field random_rough_field(const Grid& g, double amplitude, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Field f(g);
  for (double& x : f.values) x = amplitude * rng.uniform(-1.0, 1.0);
  mean_zero_project_in_place(f);
  return f;
}

inline Field random_smooth_field(const Grid& g, double amplitude, int max_mode,
                                 std::uint64_t seed) {
  InitialConditionPreset p;
  p.name = "random_bandlimited";
  p.amplitude = amplitude;
  p.max_mode = max_mode;
  p.seed = seed;
  return make_initial_condition(g, p);
}

inline Field cosine_mode(const Grid& g, int k, double amplitude) {
  InitialConditionPreset p;
  p.name = "cosine";
  p.k = k;
  p.amplitude = amplitude;
  return make_initial_condition(g, p);
}

inline double rel_diff(double a, double b) {
  const double s = std::max(std::fabs(a), std::fabs(b));
  return s == 0.0 ? 0.0 : std::fabs(a - b) / s;
}

}  // namespace tfe::test
