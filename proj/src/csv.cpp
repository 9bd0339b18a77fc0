#include "resdet/csv.hpp"

#include <cmath>
#include <cstdio>

namespace resdet {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace, std::size_t smoothing) {
  std::vector<double> norms;
  norms.reserve(trace.records.size());
  for (const auto& rec : trace.records) norms.push_back(rec.norm_x());
  std::vector<double> smooth;
  if (smoothing > 0) smooth = moving_average(norms, smoothing);

  out << "k,norm_x,z,stat,alarm,attack_active";
  if (smoothing > 0) out << ",norm_x_ma" << smoothing;
  out << '\n';
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const StepRecord& rec = trace.records[i];
    out << rec.k << ',' << format_number(norms[i]) << ',' << format_number(rec.z) << ','
        << format_number(rec.statistic) << ',' << (rec.alarm ? 1 : 0) << ','
        << (rec.attack_active ? 1 : 0);
    if (smoothing > 0) out << ',' << format_number(smooth[i]);
    out << '\n';
  }
}

void write_contours_csv(std::ostream& out, const std::vector<ContourRow>& rows) {
  out << "far,ell,beta,beta_over_ell\n";
  for (const ContourRow& row : rows) {
    out << format_number(row.far) << ',' << row.ell << ',' << format_number(row.beta) << ','
        << format_number(row.beta_over_ell) << '\n';
  }
}

}  // namespace resdet
