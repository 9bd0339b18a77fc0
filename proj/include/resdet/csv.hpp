#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "resdet/sim.hpp"

namespace resdet {

/// Shortest decimal that keeps at most 12 significant digits.
std::string format_number(double value);

/// Header `k,norm_x,z,stat,alarm,attack_active`, one row per step. With
/// `smoothing` > 0 a trailing moving average of norm_x is appended as
/// `norm_x_ma<smoothing>`.
void write_trace_csv(std::ostream& out, const SimulationTrace& trace, std::size_t smoothing = 0);

/// Header `far,ell,beta,beta_over_ell`.
void write_contours_csv(std::ostream& out, const std::vector<ContourRow>& rows);

}  // namespace resdet
