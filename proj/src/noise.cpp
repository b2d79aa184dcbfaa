#include "snse/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "snse/errors.hpp"

namespace snse {

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

double keyed_normal(std::uint64_t seed, std::uint64_t step, std::uint32_t mode) {
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), mode,
                                0x5e5e5e5eu};
  const auto r = Philox4x32::generate(ctr, key);
  auto open01 = [](std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  };
  const double u1 = open01(r[0], r[1]);
  const double u2 = open01(r[2], r[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

// Wave vectors and phases cycle with the mode index; all derivatives stay bounded in n.
Vec2 wave_a(int n) {
  static const Vec2 k[4] = {Vec2(1.0, 0.0), Vec2(0.0, 1.0), Vec2(1.0, 1.0), Vec2(1.0, -1.0)};
  return k[(n - 1) % 4];
}
Vec2 wave_b(int n) {
  static const Vec2 k[4] = {Vec2(0.0, 1.0), Vec2(1.0, 1.0), Vec2(1.0, -1.0), Vec2(1.0, 0.0)};
  return k[(n - 1) % 4];
}
double phase_a(int n) { return 0.37 * n; }
double phase_b(int n) { return 1.13 * n; }

}  // namespace

NoiseModel::NoiseModel(const NoiseParameters& params) : params_(params) {
  if (params_.modes < 1) throw InvalidArgument("NoiseModel: at least one mode is required");
  if (!(params_.decay > 0.5)) throw InvalidArgument("NoiseModel: decay exponent must exceed 1/2");
  if (params_.c_scale < 0.0 || params_.coupling < 0.0 || !(params_.saturation > 0.0)) {
    throw InvalidArgument("NoiseModel: scales must be non-negative and saturation positive");
  }
  double weight_sum = 0.0;
  for (int n = 1; n <= params_.modes; ++n) weight_sum += weight(n) * weight(n);
  const double gamma = params_.coupling;
  const double pi2 = std::numbers::pi * std::numbers::pi;

  if (params_.family == NoiseFamily::standard) {
    // |a_n| <= sqrt 2, |grad a_n|^2 <= pi^2 (|k|^2+|l|^2) <= 4 pi^2, |hess a_n|^2 <= pi^4 (|k|^4+|l|^4) <= 8 pi^4.
    const double x_part = 4.0 * pi2 + 8.0 * pi2 * pi2;
    const double growth = std::max(2.0, gamma * gamma) + x_part;
    // |chi'| <= gamma per component, |chi''| <= (4 / 3^{3/2}) gamma / kappa.
    const double chi2 = 4.0 / (3.0 * std::sqrt(3.0)) * gamma / params_.saturation;
    const double lipschitz = 2.0 * gamma * gamma + 2.0 * chi2 * chi2;
    bound_ = std::sqrt(weight_sum * std::max(growth, lipschitz));
  } else {
    // f_n = w_n g_n(x) rho(y). The x-supremum of sum w_n^2 (|g|^2 + |grad g|^2 + |hess g|^2) is
    // sampled on a fine lattice with finite-difference Hessians and padded by 10%.
    const int grid = 80;
    const double fd = 1e-5;
    double sup_x = 0.0;
    for (int i = 0; i <= grid; ++i) {
      for (int j = 0; j <= grid; ++j) {
        Vec2 x = params_.domain == Domain::square ? Vec2(double(i) / grid, double(j) / grid)
                                                    : Vec2(2.0 * i / grid - 1.0, 2.0 * j / grid - 1.0);
        if (params_.domain == Domain::disk && x.squaredNorm() > 1.0) continue;
        double sum = 0.0;
        for (int n = 1; n <= params_.modes; ++n) {
          const Jet psi = stream(n, x);
          const double hess_fd = [&] {
            double acc = 0.0;
            for (int d = 0; d < 2; ++d) {
              Vec2 e = Vec2::Zero();
              e[d] = fd;
              const Eigen::Matrix2d diff = (curl_gradient(stream(n, x + e)) - curl_gradient(stream(n, x - e))) / (2 * fd);
              acc += diff.squaredNorm();
            }
            return acc;
          }();
          sum += weight(n) * weight(n) * (curl(psi).squaredNorm() + curl_gradient(psi).squaredNorm() + hess_fd);
        }
        sup_x = std::max(sup_x, sum);
      }
    }
    sup_x *= 1.1;
    // rho(y) = sqrt(1 + gamma^2 |y|^2): rho <= max(1, gamma)(1+|y|), |grad rho| <= gamma, |hess rho| <= sqrt 2 gamma^2.
    const double growth = std::max(1.0, gamma * gamma);
    const double lipschitz = gamma * gamma + 2.0 * gamma * gamma * gamma * gamma;
    bound_ = std::sqrt(sup_x * std::max(growth, lipschitz));
  }
}

double NoiseModel::weight(int n) const { return params_.c_scale * std::pow(static_cast<double>(n), -params_.decay); }

Jet NoiseModel::stream(int n, const Vec2& x) const {
  const Vec2 k = wave_a(n);
  return boundary_bump(params_.domain, x) * plane_wave(k, phase_a(n), x);
}

Vec2 NoiseModel::value(int n, const Vec2& x, const Vec2& y) const {
  const double w = weight(n);
  if (params_.family == NoiseFamily::standard) {
    const double pi = std::numbers::pi;
    const double kappa = params_.saturation;
    const double gk = params_.coupling * kappa;
    return w * Vec2(std::sin(pi * wave_a(n).dot(x) + phase_a(n)) + gk * std::tanh(y.x() / kappa),
                    std::cos(pi * wave_b(n).dot(x) + phase_b(n)) + gk * std::tanh(y.y() / kappa));
  }
  const double rho = std::sqrt(1.0 + params_.coupling * params_.coupling * y.squaredNorm());
  return w * rho * curl(stream(n, x));
}

Eigen::Matrix2d NoiseModel::jacobian_y(int n, const Vec2& x, const Vec2& y) const {
  const double w = weight(n);
  const double gamma = params_.coupling;
  Eigen::Matrix2d out = Eigen::Matrix2d::Zero();
  if (params_.family == NoiseFamily::standard) {
    const double kappa = params_.saturation;
    const double cx = std::cosh(y.x() / kappa), cy = std::cosh(y.y() / kappa);
    out(0, 0) = w * gamma / (cx * cx);
    out(1, 1) = w * gamma / (cy * cy);
    return out;
  }
  const double rho = std::sqrt(1.0 + gamma * gamma * y.squaredNorm());
  const Vec2 grad_rho = gamma * gamma * y / rho;
  return w * curl(stream(n, x)) * grad_rho.transpose();
}

Eigen::Matrix2d NoiseModel::gradient_x(int n, const Vec2& x, const Vec2& y) const {
  const double w = weight(n);
  if (params_.family == NoiseFamily::standard) {
    const double pi = std::numbers::pi;
    Eigen::Matrix2d out;
    out.row(0) = pi * std::cos(pi * wave_a(n).dot(x) + phase_a(n)) * wave_a(n).transpose();
    out.row(1) = -pi * std::sin(pi * wave_b(n).dot(x) + phase_b(n)) * wave_b(n).transpose();
    return w * out;
  }
  const double rho = std::sqrt(1.0 + params_.coupling * params_.coupling * y.squaredNorm());
  return w * rho * curl_gradient(stream(n, x));
}

std::string NoiseModel::describe() const {
  nlohmann::ordered_json j;
  j["family"] = params_.family == NoiseFamily::standard ? "standard" : "divergence-free";
  j["modes"] = params_.modes;
  j["c_scale"] = params_.c_scale;
  j["decay"] = params_.decay;
  j["coupling"] = params_.coupling;
  j["saturation"] = params_.saturation;
  j["domain"] = params_.domain == Domain::square ? "square" : "disk";
  j["bound_constant"] = bound_;
  return j.dump();
}

HypothesisCheck check_hypothesis(const NoiseModel& model, int x_grid, int y_samples, double y_max) {
  HypothesisCheck check;
  check.bound = model.bound_constant();
  const Domain domain = model.parameters().domain;
  std::vector<Vec2> ys;
  ys.reserve(y_samples);
  for (int i = 0; i < y_samples; ++i) {
    // radii spread logarithmically up to y_max, angles golden-ratio spaced
    const double r = i == 0 ? 0.0 : y_max * std::pow(10.0, -4.0 * (y_samples - 1 - i) / std::max(1, y_samples - 1));
    const double theta = 2.399963229728653 * i;
    ys.emplace_back(r * std::cos(theta), r * std::sin(theta));
  }
  for (int i = 0; i < x_grid; ++i) {
    for (int j = 0; j < x_grid; ++j) {
      const double s = (i + 0.5) / x_grid, t = (j + 0.5) / x_grid;
      const Vec2 x = domain == Domain::square ? Vec2(s, t) : Vec2(2.0 * s - 1.0, 2.0 * t - 1.0);
      if (domain == Domain::disk && x.squaredNorm() > 1.0) continue;
      for (const Vec2& y : ys) {
        double growth = 0.0, lipschitz = 0.0;
        for (int n = 1; n <= model.modes(); ++n) {
          growth += model.value(n, x, y).squaredNorm() + model.gradient_x(n, x, y).squaredNorm();
          lipschitz += model.jacobian_y(n, x, y).squaredNorm();
        }
        check.max_growth_ratio = std::max(check.max_growth_ratio, std::sqrt(growth) / (1.0 + y.norm()));
        check.max_lipschitz_ratio = std::max(check.max_lipschitz_ratio, std::sqrt(lipschitz));
        ++check.samples;
      }
    }
  }
  return check;
}

NoiseModel default_model(int modes, double c_scale, Domain domain) {
  NoiseParameters params;
  params.modes = modes;
  params.c_scale = c_scale;
  params.domain = domain;
  NoiseModel model(params);
  const HypothesisCheck check = check_hypothesis(model, 20, 20);
  if (!check.ok()) throw InvalidArgument("default_model: sampled hypothesis bounds violated");
  return model;
}

BrownianPath::BrownianPath(std::uint64_t seed, int steps, int modes, double tau, double quantum,
                           Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> quanta)
    : seed_(seed), steps_(steps), modes_(modes), tau_(tau), quantum_(quantum), quanta_(std::move(quanta)) {
  if (quanta_.rows() != steps_ || quanta_.cols() != modes_) throw InvalidArgument("BrownianPath: shape mismatch");
}

Eigen::VectorXd BrownianPath::increments(int step) const {
  Eigen::VectorXd out(modes_);
  for (int n = 0; n < modes_; ++n) out[n] = increment(step, n);
  return out;
}

BrownianPath sample_path(std::uint64_t seed, int steps, int modes, double tau) {
  if (steps < 1 || modes < 1 || !(tau > 0.0)) throw InvalidArgument("sample_path: need J, N >= 1 and tau > 0");
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> quanta(steps, modes);
  for (int j = 0; j < steps; ++j) {
    for (int n = 0; n < modes; ++n) {
      quanta(j, n) = std::llround(keyed_normal(seed, static_cast<std::uint64_t>(j), static_cast<std::uint32_t>(n)) *
                                  kQuantaPerUnit);
    }
  }
  return BrownianPath(seed, steps, modes, tau, std::sqrt(tau) / kQuantaPerUnit, std::move(quanta));
}

BrownianPath coarsen_path(const BrownianPath& path, int factor) {
  if (factor < 1 || path.steps() % factor != 0) {
    throw InvalidArgument("coarsen_path: factor must divide the number of steps");
  }
  const int steps = path.steps() / factor;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> quanta =
      Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(steps, path.modes());
  for (int j = 0; j < steps; ++j) {
    for (int i = 0; i < factor; ++i) quanta.row(j) += path.quanta().row(j * factor + i);
  }
  return BrownianPath(path.seed(), steps, path.modes(), path.tau() * factor, path.quantum(), std::move(quanta));
}

VelocityVector gaussian_velocity(const TaylorHoodSpace& s, std::uint64_t seed, std::uint32_t salt) {
  VelocityVector v{Eigen::VectorXd(s.n_vel_free())};
  for (int i = 0; i < s.n_vel_free(); ++i) v.coefficients[i] = keyed_normal(seed, static_cast<std::uint64_t>(i), salt);
  return v;
}

DualVector noise_load(const TaylorHoodSpace& s, const NoiseModel& model, const VelocityVector& u,
                      const Eigen::VectorXd& increments) {
  if (increments.size() != model.modes()) throw InvalidArgument("noise_load: increment count != modes");
  DualVector out{Eigen::VectorXd::Zero(s.n_vel_free())};
  if (increments.isZero(0.0)) return out;
  const BasisTable& table = default_table();
  std::array<double, 2 * kP3LocalDofs> local;
  for (int t = 0; t < s.mesh().num_triangles(); ++t) {
    gather_local(s, u, t, local);
    const ElementGeometry& geo = s.geometry(t);
    const auto& dofs = s.local_free_dofs(t);
    for (std::size_t q = 0; q < table.size(); ++q) {
      const auto& phi = table.p3[q];
      Vec2 y(0.0, 0.0);
      for (int a = 0; a < kP3LocalDofs; ++a) {
        y.x() += phi[a] * local[2 * a];
        y.y() += phi[a] * local[2 * a + 1];
      }
      const Vec2 x = geo.map(table.rule.points[q]);
      Vec2 g(0.0, 0.0);
      for (int n = 1; n <= model.modes(); ++n) {
        const double db = increments[n - 1];
        if (db != 0.0) g += db * model.value(n, x, y);
      }
      const double w = 2.0 * geo.area * table.rule.weights[q];
      for (int a = 0; a < kP3LocalDofs; ++a) {
        if (dofs[2 * a] < 0) continue;
        out.values[dofs[2 * a]] += w * phi[a] * g.x();
        out.values[dofs[2 * a + 1]] += w * phi[a] * g.y();
      }
    }
  }
  return out;
}

}  // namespace snse
