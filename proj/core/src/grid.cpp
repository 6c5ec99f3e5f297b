#include "tfe/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tfe {

Grid build_grid(int dim, int n, double length) {
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("build_grid: dim must be 1 or 2, got " + std::to_string(dim));
  if (n < 4)
    throw std::invalid_argument("build_grid: n >= 4 required, got " + std::to_string(n));
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument("build_grid: length must be positive and finite");
  Grid g;
  g.dim = dim;
  g.n = n;
  g.length = length;
  g.h = length / n;
  g.cell_volume = (dim == 1) ? g.h : g.h * g.h;
  return g;
}

double kahan_sum(std::span<const double> xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

static void require_same_grid(const Field& a, const Field& b, const char* who) {
  if (!(a.grid == b.grid))
    throw std::invalid_argument(std::string(who) + ": fields live on different grids");
}

void neumann_laplacian(const Field& f, Field& out) {
  require_same_grid(f, out, "neumann_laplacian");
  const Grid& g = f.grid;
  const double inv_h2 = 1.0 / (g.h * g.h);
  const int n = g.n;
  const double* v = f.values.data();
  double* o = out.values.data();
  if (g.dim == 1) {
    for (int i = 0; i < n; ++i) {
      // reflected ghost cell == zero flux through the boundary face
      const double dl = (i > 0) ? v[i - 1] - v[i] : 0.0;
      const double dr = (i < n - 1) ? v[i + 1] - v[i] : 0.0;
      o[i] = (dl + dr) * inv_h2;
    }
  } else {
    for (int iy = 0; iy < n; ++iy) {
      const int row = iy * n;
      for (int ix = 0; ix < n; ++ix) {
        const int k = row + ix;
        const double c = v[k];
        const double dl = (ix > 0) ? v[k - 1] - c : 0.0;
        const double dr = (ix < n - 1) ? v[k + 1] - c : 0.0;
        const double dd = (iy > 0) ? v[k - n] - c : 0.0;
        const double du = (iy < n - 1) ? v[k + n] - c : 0.0;
        o[k] = (dl + dr + dd + du) * inv_h2;
      }
    }
  }
  out.mean_zero = true;  // image of the stencil integrates to zero
}

Field neumann_laplacian(const Field& f) {
  Field out(f.grid);
  neumann_laplacian(f, out);
  return out;
}

double integral(const Field& f) {
  return f.grid.cell_volume * kahan_sum(f.values);
}

void mean_zero_project_in_place(Field& f) {
  const double mean = kahan_sum(f.values) / static_cast<double>(f.values.size());
  for (double& x : f.values) x -= mean;
  f.mean_zero = true;
}

Field mean_zero_project(const Field& f) {
  Field out = f;
  mean_zero_project_in_place(out);
  return out;
}

double inner(const Field& f, const Field& g) {
  require_same_grid(f, g, "inner");
  double s = 0.0, c = 0.0;
  const size_t m = f.values.size();
  for (size_t i = 0; i < m; ++i) {
    double y = f.values[i] * g.values[i] - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return f.grid.cell_volume * s;
}

double norm_h(const Field& f) { return std::sqrt(inner(f, f)); }

MeasureNorms measure_norms(const Field& lap) {
  double sp = 0.0, cp = 0.0, sn = 0.0, cn = 0.0;
  for (double x : lap.values) {
    if (x >= 0.0) {
      double y = x - cp;
      double t = sp + y;
      cp = (t - sp) - y;
      sp = t;
    } else {
      double y = -x - cn;
      double t = sn + y;
      cn = (t - sn) - y;
      sn = t;
    }
  }
  MeasureNorms m;
  m.pos = lap.grid.cell_volume * sp;
  m.neg = lap.grid.cell_volume * sn;
  m.total = m.pos + m.neg;
  return m;
}

void add_scaled(Field& dst, double alpha, const Field& src) {
  require_same_grid(dst, src, "add_scaled");
  const size_t m = dst.values.size();
  for (size_t i = 0; i < m; ++i) dst.values[i] += alpha * src.values[i];
  dst.mean_zero = dst.mean_zero && src.mean_zero;
}

Field lin_comb(double a, const Field& f, double b, const Field& g) {
  require_same_grid(f, g, "lin_comb");
  Field out(f.grid);
  const size_t m = f.values.size();
  for (size_t i = 0; i < m; ++i) out.values[i] = a * f.values[i] + b * g.values[i];
  out.mean_zero = f.mean_zero && g.mean_zero;
  return out;
}

}  // namespace tfe
