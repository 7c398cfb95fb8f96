#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "hjb/solver.hpp"

namespace hjb {

/// Locale-independent decimal with 17 significant digits (round-trips a double).
std::string format_real(double value);

/// Header `t,node_index,x1[,x2],u`; one row per node per exported snapshot.
void write_trajectory_csv(std::ostream& os, const Trajectory<double>& traj, double export_every = 0);

struct ErgodicRow {
  double lambda;
  double c;
  double spread;
  double residual;
};

/// Header `lambda,c,spread,residual`.
void write_ergodic_csv(std::ostream& os, const std::vector<ErgodicRow>& rows);

/// Header `t,M_plus,osc_shifted`, then a final `converged,<bool>,final_osc,<real>` record.
void write_diagnostics_csv(std::ostream& os, const std::vector<std::pair<double, double>>& m_series,
                           const std::vector<double>& osc_shifted, bool converged, double final_osc);

}  // namespace hjb
