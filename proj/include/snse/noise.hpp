#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "snse/fields.hpp"
#include "snse/space.hpp"

namespace snse {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  [[nodiscard]] static Counter generate(Counter counter, Key key);
};

/// Standard normal draw keyed by (seed, step, mode); independent of evaluation order.
[[nodiscard]] double keyed_normal(std::uint64_t seed, std::uint64_t step, std::uint32_t mode);

enum class NoiseFamily {
  standard,         // f_n(x,y) = c n^-s (a_n(x) + chi(y))
  divergence_free,  // f_n(x,y) = c n^-s curl(psi_n)(x) rho(y), psi_n vanishing to 2nd order on the boundary
};

struct NoiseParameters {
  NoiseFamily family = NoiseFamily::standard;
  int modes = 16;
  double c_scale = 1.0;
  double decay = 1.0;       // s, must exceed 1/2
  double coupling = 1.0;    // gamma, Lipschitz constant of the y-dependence
  double saturation = 4.0;  // kappa in chi_i(y) = gamma kappa tanh(y_i / kappa)
  Domain domain = Domain::disk;
};

/// Truncated diffusion family {f_n}_{n<=N}. Modes are numbered from 1.
class NoiseModel {
 public:
  explicit NoiseModel(const NoiseParameters& params);

  [[nodiscard]] const NoiseParameters& parameters() const { return params_; }
  [[nodiscard]] int modes() const { return params_.modes; }
  [[nodiscard]] bool divergence_free_modes() const { return params_.family == NoiseFamily::divergence_free; }
  /// C_F bounding the truncated sums of the growth and Lipschitz conditions.
  [[nodiscard]] double bound_constant() const { return bound_; }
  [[nodiscard]] bool is_zero() const { return params_.c_scale == 0.0; }

  [[nodiscard]] Vec2 value(int n, const Vec2& x, const Vec2& y) const;
  /// d f / d y, rows are components.
  [[nodiscard]] Eigen::Matrix2d jacobian_y(int n, const Vec2& x, const Vec2& y) const;
  /// d f / d x, rows are components.
  [[nodiscard]] Eigen::Matrix2d gradient_x(int n, const Vec2& x, const Vec2& y) const;

  /// JSON description used in trajectory and result headers.
  [[nodiscard]] std::string describe() const;

 private:
  [[nodiscard]] double weight(int n) const;
  [[nodiscard]] Jet stream(int n, const Vec2& x) const;

  NoiseParameters params_;
  double bound_ = 0.0;
};

struct HypothesisCheck {
  double max_growth_ratio = 0.0;      // sup sqrt(sum |f_n|^2 + |grad_x f_n|^2) / (1 + |y|)
  double max_lipschitz_ratio = 0.0;   // sup sqrt(sum |d_y f_n|^2)
  double bound = 0.0;
  int samples = 0;
  [[nodiscard]] bool ok() const { return max_growth_ratio <= bound && max_lipschitz_ratio <= bound; }
};

/// Samples the growth and Lipschitz sums on an x_grid^2 lattice over the domain's
/// bounding box (restricted to the domain) times y_samples values of y.
[[nodiscard]] HypothesisCheck check_hypothesis(const NoiseModel& model, int x_grid = 50, int y_samples = 50,
                                               double y_max = 100.0);

/// Standard family with decay s = 1; throws InvalidArgument if the sampled bounds fail.
[[nodiscard]] NoiseModel default_model(int modes, double c_scale, Domain domain = Domain::disk);

/// Increments of N independent Brownian motions over J steps of size tau.
///
/// Draws are stored as integer multiples of a fixed quantum so that coarsening
/// (summing consecutive increments) is exact and associative.
class BrownianPath {
 public:
  BrownianPath(std::uint64_t seed, int steps, int modes, double tau, double quantum,
               Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> quanta);

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] int steps() const { return steps_; }
  [[nodiscard]] int modes() const { return modes_; }
  [[nodiscard]] double tau() const { return tau_; }
  [[nodiscard]] double quantum() const { return quantum_; }
  [[nodiscard]] const Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& quanta() const {
    return quanta_;
  }

  [[nodiscard]] double increment(int step, int mode_index) const {
    return static_cast<double>(quanta_(step, mode_index)) * quantum_;
  }
  /// All N increments of one step.
  [[nodiscard]] Eigen::VectorXd increments(int step) const;

 private:
  std::uint64_t seed_;
  int steps_;
  int modes_;
  double tau_;
  double quantum_;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> quanta_;
};

inline constexpr double kQuantaPerUnit = 4294967296.0;  // 2^32 quanta per standard deviation

[[nodiscard]] BrownianPath sample_path(std::uint64_t seed, int steps, int modes, double tau);

/// Step j of the result is the sum of fine steps jk .. jk+k-1.
[[nodiscard]] BrownianPath coarsen_path(const BrownianPath& path, int factor);

/// Free velocity coefficients keyed_normal(seed, i, salt): a reproducible rough test field.
[[nodiscard]] VelocityVector gaussian_velocity(const TaylorHoodSpace& s, std::uint64_t seed, std::uint32_t salt = 0);

/// sum_n dbeta_n <f_n(., u(.)), v> over the free velocity test functions.
[[nodiscard]] DualVector noise_load(const TaylorHoodSpace& s, const NoiseModel& model, const VelocityVector& u,
                                    const Eigen::VectorXd& increments);

}  // namespace snse
