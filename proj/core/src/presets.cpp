#include "tfe/presets.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "tfe/rng.hpp"

namespace tfe {

bool preset_exists(const std::string& name) {
  return name == "cosine" || name == "gaussian_bump" || name == "cone" ||
         name == "random_bandlimited" || name == "from_file";
}

static double center_coord(const InitialConditionPreset& p, int axis) {
  if (p.center.empty()) return 0.5;
  if (static_cast<size_t>(axis) < p.center.size()) return p.center[static_cast<size_t>(axis)];
  return p.center[0];
}

static Field cosine_field(const Grid& g, int k, double amplitude) {
  Field f(g);
  const double w = k * M_PI / g.length;
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i) f[i] = amplitude * std::cos(w * g.center(i));
  } else {
    for (int iy = 0; iy < g.n; ++iy) {
      const double cy = std::cos(w * g.center(iy));
      for (int ix = 0; ix < g.n; ++ix)
        f[iy * g.n + ix] = amplitude * std::cos(w * g.center(ix)) * cy;
    }
  }
  return f;
}

static double radial_distance2(const Grid& g, const InitialConditionPreset& p, int idx) {
  if (g.dim == 1) {
    const double d = g.center(idx) - center_coord(p, 0);
    return d * d;
  }
  const double dx = g.center(idx % g.n) - center_coord(p, 0);
  const double dy = g.center(idx / g.n) - center_coord(p, 1);
  return dx * dx + dy * dy;
}

Field make_initial_condition(const Grid& g, const InitialConditionPreset& p,
                             double* removed_mean) {
  Field f(g);
  if (p.name == "cosine") {
    f = cosine_field(g, p.k, p.amplitude);
  } else if (p.name == "gaussian_bump") {
    const double inv = 1.0 / (2.0 * p.width * p.width);
    for (int i = 0; i < f.size(); ++i)
      f[i] = p.amplitude * std::exp(-radial_distance2(g, p, i) * inv);
  } else if (p.name == "cone") {
    for (int i = 0; i < f.size(); ++i)
      f[i] = p.slope * std::sqrt(radial_distance2(g, p, i));
  } else if (p.name == "random_bandlimited") {
    SplitMix64 rng(p.seed);
    if (g.dim == 1) {
      for (int k = 1; k <= p.max_mode; ++k) {
        const double c = p.amplitude * rng.uniform(-1.0, 1.0);
        const double w = k * M_PI / g.length;
        for (int i = 0; i < g.n; ++i) f[i] += c * std::cos(w * g.center(i));
      }
    } else {
      for (int kx = 0; kx <= p.max_mode; ++kx) {
        for (int ky = 0; ky <= p.max_mode; ++ky) {
          if (kx == 0 && ky == 0) continue;
          const double c = p.amplitude * rng.uniform(-1.0, 1.0);
          const double wx = kx * M_PI / g.length;
          const double wy = ky * M_PI / g.length;
          for (int iy = 0; iy < g.n; ++iy) {
            const double cy = std::cos(wy * g.center(iy));
            for (int ix = 0; ix < g.n; ++ix)
              f[iy * g.n + ix] += c * std::cos(wx * g.center(ix)) * cy;
          }
        }
      }
    }
  } else if (p.name == "from_file") {
    std::ifstream in(p.path);
    if (!in) throw std::runtime_error("from_file: cannot open '" + p.path + "'");
    for (int i = 0; i < f.size(); ++i) {
      if (!(in >> f[i]))
        throw std::runtime_error("from_file: '" + p.path + "' has fewer values than grid cells");
    }
    double extra;
    if (in >> extra)
      throw std::runtime_error("from_file: '" + p.path + "' has more values than grid cells");
  } else {
    throw std::invalid_argument("unknown initial-condition preset '" + p.name + "'");
  }

  const double mean = kahan_sum(f.values) / static_cast<double>(f.values.size());
  if (removed_mean) *removed_mean = mean;
  for (double& x : f.values) x -= mean;
  f.mean_zero = true;
  return f;
}

std::vector<Field> make_test_battery(const Grid& g, int count, double amplitude,
                                     std::uint64_t seed) {
  std::vector<Field> out;
  out.reserve(static_cast<size_t>(count));
  Field flat(g);
  flat.mean_zero = true;
  out.push_back(flat);
  for (int i = 1; i < count; ++i) {
    InitialConditionPreset p;
    p.name = "random_bandlimited";
    p.amplitude = amplitude;
    p.max_mode = (g.dim == 1) ? 6 : 3;
    p.seed = seed + static_cast<std::uint64_t>(i) * 0x9e3779b97f4a7c15ull;
    out.push_back(make_initial_condition(g, p));
  }
  return out;
}

}  // namespace tfe
