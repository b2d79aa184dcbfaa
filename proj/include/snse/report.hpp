#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "snse/experiments.hpp"

namespace snse {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Shortest round-trip decimal form; "nan" and "inf" for non-finite values.
[[nodiscard]] std::string format_double(double v);

/// Tab-separated, one row per (sample, level):
/// seed level h tau error max_l2 ref_max_h1 newton_iterations pass_r_h pass_r_h_tau failed failure
void write_sample_table(std::ostream& os, const ErrorStats& stats, double r_h, double r_h_tau);

/// Tab-separated, one row per level:
/// level h tau J samples failures rms mean_square median q90 filtered_rms mean_max_l2_sq
void write_level_table(std::ostream& os, const ErrorStats& stats, const LocalSetFilter& filter);

/// key = value lines.
void write_summary(std::ostream& os, const KeyValues& values);
[[nodiscard]] KeyValues study_summary(const ErrorStats& stats, const LocalSetFilter& filter);

/// Tab-separated: pair h tau alpha beta samples epsilon probability lower upper
void write_exceedance_table(std::ostream& os, const std::vector<ExceedanceCurve>& curves);

/// Log-log rms error per level with the fitted line.
void write_error_plot(std::ostream& os, const ErrorStats& stats, const std::string& title);
/// Exceedance probability against epsilon (log axis), one polyline per curve.
void write_exceedance_plot(std::ostream& os, const std::vector<ExceedanceCurve>& curves, const std::string& title);

}  // namespace snse
