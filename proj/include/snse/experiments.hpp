#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "snse/scheme.hpp"

namespace snse {

/// L2 distance between a field on a coarse space and one on a finer space. The
/// difference is integrated on the fine elements; each quadrature point is located
/// in the coarse mesh (tolerance 1e-12) and treated as zero there when outside it.
class SnapshotComparator {
 public:
  SnapshotComparator(std::shared_ptr<const TaylorHoodSpace> coarse, std::shared_ptr<const TaylorHoodSpace> fine);

  [[nodiscard]] double distance(const VelocityVector& coarse, const VelocityVector& fine) const;
  [[nodiscard]] const TaylorHoodSpace& coarse() const { return *coarse_; }
  [[nodiscard]] const TaylorHoodSpace& fine() const { return *fine_; }
  /// Fine quadrature points that fell outside the coarse mesh.
  [[nodiscard]] int outside_points() const { return outside_; }

 private:
  struct Sample {
    int fine_triangle;
    int coarse_triangle;  // -1 when outside
    double weight;
    std::array<double, kP3LocalDofs> fine_phi;
    std::array<double, kP3LocalDofs> coarse_phi;
  };
  std::shared_ptr<const TaylorHoodSpace> coarse_;
  std::shared_ptr<const TaylorHoodSpace> fine_;
  std::vector<Sample> samples_;
  int outside_ = 0;
};

/// max_{1<=i<=J_a} ||a(i) - b(i * stride)||. Requires equal T and J_b = stride * J_a.
/// Trajectories on different spaces need a comparator (coarse = a's space, fine = b's).
[[nodiscard]] double pathwise_uniform_error(const Trajectory& a, const Trajectory& b, int stride,
                                            const SnapshotComparator* comparator = nullptr);

/// Ordinary least squares y = intercept + slope x.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;        // root mean square of the fit residuals
  double standard_error = 0.0;  // of the slope
  int points = 0;
};

[[nodiscard]] SlopeFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

/// One discretization of a study: operators on a mesh and the number of steps over [0, T].
struct Discretization {
  std::shared_ptr<const StokesOperators> ops;
  int J = 0;
  [[nodiscard]] double h() const { return ops->space().h(); }
};

enum class StudyKind { temporal, spatial, coupled };

/// A Monte Carlo study: every level and the reference are driven by the same Brownian path,
/// sampled at the reference resolution and coarsened to each level.
struct StudyConfig {
  StudyKind kind = StudyKind::coupled;
  SchemeConfig scheme;  // T, Newton settings; J is taken from each discretization
  NoiseParameters noise;
  VectorField initial;  // projected onto each space
  std::vector<Discretization> levels;
  Discretization reference;
  std::vector<std::uint64_t> seeds;
  int workers = 1;
};

struct SampleRow {
  std::uint64_t seed = 0;
  int level = 0;
  double h = 0.0;
  double tau = 0.0;
  double error = 0.0;  // pathwise uniform error against the reference
  double max_l2 = 0.0;            // max_j ||Y_j|| of the level run
  double reference_max_h1 = 0.0;  // max_j ||grad y_ref(t_j)|| of the reference run
  int newton_iterations = 0;
  bool failed = false;
  std::string failure;
};

struct LevelSummary {
  int level = 0;
  double h = 0.0;
  double tau = 0.0;
  int J = 0;
  int samples = 0;
  int failures = 0;
  double mean_square = 0.0;
  double rms = 0.0;
  double median = 0.0;
  double q90 = 0.0;
  double mean_max_l2_squared = 0.0;  // sample mean of max_j ||Y_j||^2
};

struct ErrorStats {
  StudyKind kind = StudyKind::coupled;
  std::vector<SampleRow> rows;  // level-major, seeds in configuration order
  std::vector<LevelSummary> levels;
  SlopeFit fit;  // log2(rms) against log2(tau) (temporal) or log2(h) (spatial); slope = observed order
  [[nodiscard]] double order() const { return fit.slope; }
  [[nodiscard]] int failures() const;
};

/// Level-by-level pathwise errors against the reference. Failed samples are recorded and excluded
/// from the level statistics.
[[nodiscard]] ErrorStats run_study(const StudyConfig& cfg);

/// Same mesh everywhere, reference J at least 4 times the finest level J, at least 3 levels.
[[nodiscard]] ErrorStats temporal_study(const StudyConfig& cfg);
/// Same J everywhere, reference mesh finer than every level, at least 3 levels.
[[nodiscard]] ErrorStats spatial_study(const StudyConfig& cfg);

struct LocalSetFilter {
  double r_h = std::numeric_limits<double>::infinity();
  double r_h_tau = std::numeric_limits<double>::infinity();
  std::vector<bool> pass;  // parallel to ErrorStats::rows; failed rows never pass
  /// Root mean square of the passing errors at one level; NaN when none pass.
  [[nodiscard]] double filtered_rms(const ErrorStats& stats, int level) const;
};

/// Pass when the reference run's max ||grad y|| <= r_h and the level run's max ||Y_j|| <= r_h_tau.
[[nodiscard]] LocalSetFilter local_set_filter(const ErrorStats& stats, double r_h, double r_h_tau);

struct ExceedanceCurve {
  std::vector<double> epsilon;
  std::vector<double> probability;  // fraction with error^2 / (h^alpha + tau^beta) >= epsilon
  std::vector<double> lower;        // Wilson 95% interval
  std::vector<double> upper;
  double alpha = 0.0;
  double beta = 0.0;
  double h = 0.0;
  double tau = 0.0;
  int samples = 0;
};

/// Wilson score interval for k successes in n trials.
[[nodiscard]] std::pair<double, double> wilson_interval(int k, int n, double z = 1.959963984540054);

/// Throws InvalidArgument unless alpha in (2,3) and beta in (0,1).
[[nodiscard]] ExceedanceCurve exceedance_curve(const std::vector<double>& errors, double h, double tau, double alpha,
                                               double beta, const std::vector<double>& epsilon);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be stored by index.
/// The first exception (lowest index) is rethrown after all workers finish.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace snse
