#include "hjb/io.hpp"

#include <cmath>
#include <iomanip>
#include <locale>
#include <sstream>
#include <stdexcept>

namespace hjb {

std::string format_real(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("format_real: non-finite value");
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << value;
  return os.str();
}

void write_trajectory_csv(std::ostream& os, const Trajectory<double>& traj, double export_every) {
  const auto& grid = traj.grid();
  os << "t,node_index,x1" << (grid.dim() == 2 ? ",x2" : "") << ",u\n";
  double next_export = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times()[i];
    const bool last = i + 1 == traj.size();
    if (export_every > 0 && !last && t < next_export - 1e-9) continue;
    if (export_every > 0) {
      while (next_export <= t + 1e-9) next_export += export_every;
    }
    const auto& u = traj.snapshots()[i];
    const std::string ts = format_real(t);
    for (Index k = 0; k < grid.size(); ++k) {
      const auto x = grid.coordinate(k);
      os << ts << ',' << k << ',' << format_real(x[0]);
      if (grid.dim() == 2) os << ',' << format_real(x[1]);
      os << ',' << format_real(u[k]) << '\n';
    }
  }
}

void write_ergodic_csv(std::ostream& os, const std::vector<ErgodicRow>& rows) {
  os << "lambda,c,spread,residual\n";
  for (const auto& r : rows)
    os << format_real(r.lambda) << ',' << format_real(r.c) << ',' << format_real(r.spread) << ','
       << format_real(r.residual) << '\n';
}

void write_diagnostics_csv(std::ostream& os, const std::vector<std::pair<double, double>>& m_series,
                           const std::vector<double>& osc_shifted, bool converged, double final_osc) {
  if (m_series.size() != osc_shifted.size()) throw std::invalid_argument("write_diagnostics_csv: series length mismatch");
  os << "t,M_plus,osc_shifted\n";
  for (std::size_t i = 0; i < m_series.size(); ++i)
    os << format_real(m_series[i].first) << ',' << format_real(m_series[i].second) << ',' << format_real(osc_shifted[i])
       << '\n';
  os << "converged," << (converged ? "true" : "false") << ",final_osc," << format_real(final_osc) << '\n';
}

}  // namespace hjb
