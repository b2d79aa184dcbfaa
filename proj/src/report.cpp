#include "snse/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace snse {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_sample_table(std::ostream& os, const ErrorStats& stats, double r_h, double r_h_tau) {
  os << "seed\tlevel\th\ttau\terror\tmax_l2\tref_max_h1\tnewton_iterations\tpass_r_h\tpass_r_h_tau\tfailed\tfailure\n";
  for (const SampleRow& r : stats.rows) {
    os << r.seed << '\t' << r.level << '\t' << format_double(r.h) << '\t' << format_double(r.tau) << '\t'
       << format_double(r.error) << '\t' << format_double(r.max_l2) << '\t' << format_double(r.reference_max_h1)
       << '\t' << r.newton_iterations << '\t' << (!r.failed && r.reference_max_h1 <= r_h ? 1 : 0) << '\t'
       << (!r.failed && r.max_l2 <= r_h_tau ? 1 : 0) << '\t' << (r.failed ? 1 : 0) << '\t'
       << (r.failure.empty() ? "-" : r.failure) << '\n';
  }
}

void write_level_table(std::ostream& os, const ErrorStats& stats, const LocalSetFilter& filter) {
  os << "level\th\ttau\tJ\tsamples\tfailures\trms\tmean_square\tmedian\tq90\tfiltered_rms\tmean_max_l2_sq\n";
  for (const LevelSummary& s : stats.levels) {
    os << s.level << '\t' << format_double(s.h) << '\t' << format_double(s.tau) << '\t' << s.J << '\t' << s.samples
       << '\t' << s.failures << '\t' << format_double(s.rms) << '\t' << format_double(s.mean_square) << '\t'
       << format_double(s.median) << '\t' << format_double(s.q90) << '\t'
       << format_double(filter.filtered_rms(stats, s.level)) << '\t' << format_double(s.mean_max_l2_squared)
       << '\n';
  }
}

void write_summary(std::ostream& os, const KeyValues& values) {
  for (const auto& [k, v] : values) os << k << " = " << v << '\n';
}

KeyValues study_summary(const ErrorStats& stats, const LocalSetFilter& filter) {
  KeyValues kv;
  const char* kind = stats.kind == StudyKind::temporal ? "temporal" : stats.kind == StudyKind::spatial ? "spatial"
                                                                                                        : "coupled";
  kv.emplace_back("study", kind);
  kv.emplace_back("levels", std::to_string(stats.levels.size()));
  kv.emplace_back("failures", std::to_string(stats.failures()));
  for (const LevelSummary& s : stats.levels) {
    const std::string p = "level." + std::to_string(s.level) + ".";
    kv.emplace_back(p + "h", format_double(s.h));
    kv.emplace_back(p + "tau", format_double(s.tau));
    kv.emplace_back(p + "rms", format_double(s.rms));
    kv.emplace_back(p + "filtered_rms", format_double(filter.filtered_rms(stats, s.level)));
    kv.emplace_back(p + "samples", std::to_string(s.samples));
  }
  kv.emplace_back("slope", format_double(stats.fit.slope));
  kv.emplace_back("slope_standard_error", format_double(stats.fit.standard_error));
  kv.emplace_back("slope_ci95_low", format_double(stats.fit.slope - 1.96 * stats.fit.standard_error));
  kv.emplace_back("slope_ci95_high", format_double(stats.fit.slope + 1.96 * stats.fit.standard_error));
  kv.emplace_back("fit_residual", format_double(stats.fit.residual));
  return kv;
}

void write_exceedance_table(std::ostream& os, const std::vector<ExceedanceCurve>& curves) {
  os << "pair\th\ttau\talpha\tbeta\tsamples\tepsilon\tprobability\tlower\tupper\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const ExceedanceCurve& e = curves[c];
    for (std::size_t i = 0; i < e.epsilon.size(); ++i) {
      os << c << '\t' << format_double(e.h) << '\t' << format_double(e.tau) << '\t' << format_double(e.alpha) << '\t'
         << format_double(e.beta) << '\t' << e.samples << '\t' << format_double(e.epsilon[i]) << '\t'
         << format_double(e.probability[i]) << '\t' << format_double(e.lower[i]) << '\t'
         << format_double(e.upper[i]) << '\n';
    }
  }
}

namespace {

constexpr double kWidth = 640, kHeight = 440, kLeft = 80, kRight = 30, kTop = 40, kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Axes {
  double x0, x1, y0, y1;
  [[nodiscard]] double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  [[nodiscard]] double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

void pad(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double m = 0.06 * (hi - lo);
  lo -= m;
  hi += m;
}

void frame(std::ostream& os, const Axes& ax, const std::string& title, const std::string& xlabel,
           const std::string& ylabel, bool log_y) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
     << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = ax.x0 + (ax.x1 - ax.x0) * i / 4.0;
    const double yv = ax.y0 + (ax.y1 - ax.y0) * i / 4.0;
    os << "<text x=\"" << num(ax.px(xv)) << "\" y=\"" << kHeight - kBottom + 18
       << "\" text-anchor=\"middle\">" << label(std::exp2(xv)) << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(ax.py(yv) + 4) << "\" text-anchor=\"end\">"
       << label(log_y ? std::exp2(yv) : yv) << "</text>\n";
  }
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">" << xlabel
     << "</text>\n";
  os << "<text x=\"18\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << kHeight / 2 << ")\">" << ylabel << "</text>\n";
}

}  // namespace

void write_error_plot(std::ostream& os, const ErrorStats& stats, const std::string& title) {
  const bool spatial = stats.kind == StudyKind::spatial;
  std::vector<std::pair<double, double>> pts;
  for (const LevelSummary& s : stats.levels) {
    if (s.rms > 0.0) pts.emplace_back(std::log2(spatial ? s.h : s.tau), std::log2(s.rms));
  }
  Axes ax{0, 1, 0, 1};
  if (!pts.empty()) {
    ax.x0 = ax.x1 = pts.front().first;
    ax.y0 = ax.y1 = pts.front().second;
    for (const auto& [x, y] : pts) {
      ax.x0 = std::min(ax.x0, x);
      ax.x1 = std::max(ax.x1, x);
      ax.y0 = std::min(ax.y0, y);
      ax.y1 = std::max(ax.y1, y);
    }
  }
  pad(ax.x0, ax.x1);
  pad(ax.y0, ax.y1);
  frame(os, ax, title, spatial ? "h" : "tau", "rms pathwise error", true);
  if (stats.fit.points >= 2) {
    const double xa = ax.x0, xb = ax.x1;
    os << "<line x1=\"" << num(ax.px(xa)) << "\" y1=\"" << num(ax.py(stats.fit.intercept + stats.fit.slope * xa))
       << "\" x2=\"" << num(ax.px(xb)) << "\" y2=\"" << num(ax.py(stats.fit.intercept + stats.fit.slope * xb))
       << "\" stroke=\"" << kColors[1] << "\" stroke-dasharray=\"6 4\"/>\n";
    os << "<text x=\"" << kLeft + 10 << "\" y=\"" << kTop + 18 << "\" fill=\"" << kColors[1] << "\">fitted order "
       << label(stats.fit.slope) << "</text>\n";
  }
  for (const auto& [x, y] : pts) {
    os << "<circle cx=\"" << num(ax.px(x)) << "\" cy=\"" << num(ax.py(y)) << "\" r=\"4\" fill=\"" << kColors[0]
       << "\"/>\n";
  }
  os << "</svg>\n";
}

void write_exceedance_plot(std::ostream& os, const std::vector<ExceedanceCurve>& curves, const std::string& title) {
  Axes ax{0, 1, 0.0, 1.0};
  bool first = true;
  for (const ExceedanceCurve& c : curves) {
    for (double e : c.epsilon) {
      if (!(e > 0.0)) continue;
      const double x = std::log2(e);
      ax.x0 = first ? x : std::min(ax.x0, x);
      ax.x1 = first ? x : std::max(ax.x1, x);
      first = false;
    }
  }
  pad(ax.x0, ax.x1);
  ax.y0 = -0.05;
  ax.y1 = 1.05;
  frame(os, ax, title, "epsilon", "exceedance probability", false);
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const ExceedanceCurve& c = curves[k];
    const char* color = kColors[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (std::size_t i = 0; i < c.epsilon.size(); ++i) {
      if (c.epsilon[i] > 0.0) os << num(ax.px(std::log2(c.epsilon[i]))) << ',' << num(ax.py(c.probability[i])) << ' ';
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < c.epsilon.size(); ++i) {
      if (!(c.epsilon[i] > 0.0)) continue;
      const double x = ax.px(std::log2(c.epsilon[i]));
      os << "<line x1=\"" << num(x) << "\" y1=\"" << num(ax.py(c.lower[i])) << "\" x2=\"" << num(x) << "\" y2=\""
         << num(ax.py(c.upper[i])) << "\" stroke=\"" << color << "\" stroke-opacity=\"0.5\"/>\n";
    }
    os << "<text x=\"" << kWidth - kRight - 10 << "\" y=\"" << kTop + 18 + 16 * k << "\" text-anchor=\"end\" fill=\""
       << color << "\">h=" << label(c.h) << " tau=" << label(c.tau) << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace snse
