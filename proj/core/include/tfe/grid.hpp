#pragma once

#include <span>
#include <vector>

namespace tfe {

/// Uniform cell-centered lattice on a square domain [0,length]^dim.
/// Cell centers sit at (i+1/2)h per axis; homogeneous Neumann boundaries are
/// realized by ghost-cell reflection, so boundary fluxes vanish identically.
struct Grid {
  int dim = 1;           // 1 or 2
  int n = 0;             // cells per axis
  double length = 0.0;   // physical extent per axis
  double h = 0.0;        // length / n
  double cell_volume = 0.0;  // h^dim

  int cells() const { return dim == 1 ? n : n * n; }
  double volume() const { return dim == 1 ? length : length * length; }
  double center(int i) const { return (i + 0.5) * h; }

  bool operator==(const Grid&) const = default;
};

/// Validates dim in {1,2}, n >= 4, length > 0; throws std::invalid_argument.
Grid build_grid(int dim, int n, double length);

/// Real-valued grid function; the discrete representative of a state u.
/// `mean_zero` is a certificate, set by mean_zero_project and preserved by
/// operations that provably keep the mean (not recomputed on access).
struct Field {
  Grid grid;
  std::vector<double> values;
  bool mean_zero = false;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0)
      : grid(g), values(static_cast<size_t>(g.cells()), fill) {}

  int size() const { return static_cast<int>(values.size()); }
  double& operator[](int i) { return values[static_cast<size_t>(i)]; }
  double operator[](int i) const { return values[static_cast<size_t>(i)]; }
};

/// Compensated (Kahan) left-to-right sum; the fixed reduction order makes
/// every scalar in the project deterministic.
double kahan_sum(std::span<const double> xs);

/// Second-order 3-point (1D) / 5-point (2D) Laplacian with reflected ghost
/// cells. Annihilates constants; image sums to zero up to rounding; symmetric
/// and negative semidefinite in the h-inner product.
void neumann_laplacian(const Field& f, Field& out);
Field neumann_laplacian(const Field& f);

/// Integral of f over the domain, cell_volume * sum(values).
double integral(const Field& f);

/// Subtracts the volume-weighted mean and sets the mean_zero certificate.
Field mean_zero_project(const Field& f);
void mean_zero_project_in_place(Field& f);

/// <f,g>_H = cell_volume * sum_i f_i g_i. Throws on grid mismatch.
double inner(const Field& f, const Field& g);
double norm_h(const Field& f);

struct MeasureNorms {
  double total = 0.0;
  double pos = 0.0;
  double neg = 0.0;
};

/// Discrete total-variation surrogate of a Laplacian image:
/// total = cell_volume * sum |lap_i|, split into positive/negative mass.
MeasureNorms measure_norms(const Field& lap);

// axpy-style helpers shared by the solver modules; fixed iteration order
void add_scaled(Field& dst, double alpha, const Field& src);  // dst += alpha*src
Field lin_comb(double a, const Field& f, double b, const Field& g);

}  // namespace tfe
