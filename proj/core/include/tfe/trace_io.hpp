#pragma once

#include <string>

#include "tfe/flow.hpp"

namespace tfe {

/// Shortest round-trip decimal form (%.17g); identical inputs serialize to
/// identical bytes on any IEEE-754 double platform.
std::string format_double(double x);

/// Fixed column order:
/// step,time,phi,phi_raw,free_energy_F,dissipation_E,measure_total,
/// measure_pos,measure_neg,max_pos_laplacian,excess_mass,slope,displacement,
/// ut_norm,pde_residual,newton_iters,cg_iters,clamp_events
std::string trace_csv(const FlowTrace& trace);
void write_trace_csv(const FlowTrace& trace, const std::string& path);

/// One value per line, row-major for 2D.
std::string snapshot_csv(const Field& f);
void write_snapshot_csv(const Field& f, const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace tfe
