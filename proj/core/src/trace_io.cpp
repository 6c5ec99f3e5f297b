#include "tfe/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace tfe {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trace_csv(const FlowTrace& tr) {
  std::string out =
      "step,time,phi,phi_raw,free_energy_F,dissipation_E,measure_total,"
      "measure_pos,measure_neg,max_pos_laplacian,excess_mass,slope,"
      "displacement,ut_norm,pde_residual,newton_iters,cg_iters,clamp_events\n";
  const size_t m = tr.times.size();
  for (size_t k = 0; k < m; ++k) {
    const EnergyReport& r = tr.reports[k];
    out += std::to_string(k);
    out += ',';
    out += format_double(tr.times[k]);
    for (double v : {r.phi, r.phi_raw, r.free_energy_F, r.dissipation_E,
                     r.measure_total, r.measure_pos, r.measure_neg,
                     r.max_pos_laplacian, r.excess_mass, r.slope,
                     tr.displacements[k], tr.ut_norms[k], tr.pde_residuals[k]}) {
      out += ',';
      out += format_double(v);
    }
    out += ',';
    out += std::to_string(tr.newton_iters[k]);
    out += ',';
    out += std::to_string(tr.cg_iters[k]);
    out += ',';
    out += std::to_string(tr.clamp_events_per_step[k]);
    out += '\n';
  }
  return out;
}

std::string snapshot_csv(const Field& f) {
  std::string out;
  out.reserve(f.values.size() * 20);
  for (double v : f.values) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_trace_csv(const FlowTrace& trace, const std::string& path) {
  write_text_file(path, trace_csv(trace));
}

void write_snapshot_csv(const Field& f, const std::string& path) {
  write_text_file(path, snapshot_csv(f));
}

}  // namespace tfe
