#include "snse/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "snse/errors.hpp"

namespace snse {

SnapshotComparator::SnapshotComparator(std::shared_ptr<const TaylorHoodSpace> coarse,
                                       std::shared_ptr<const TaylorHoodSpace> fine)
    : coarse_(std::move(coarse)), fine_(std::move(fine)) {
  const BasisTable& table = default_table();
  samples_.reserve(static_cast<std::size_t>(fine_->mesh().num_triangles()) * table.size());
  for (int t = 0; t < fine_->mesh().num_triangles(); ++t) {
    const ElementGeometry& geo = fine_->geometry(t);
    for (std::size_t q = 0; q < table.size(); ++q) {
      Sample s;
      s.fine_triangle = t;
      s.weight = 2.0 * geo.area * table.rule.weights[q];
      std::copy(table.p3[q].begin(), table.p3[q].end(), s.fine_phi.begin());
      const auto hit = coarse_->locator().locate(geo.map(table.rule.points[q]), 1e-12);
      if (hit) {
        s.coarse_triangle = hit->triangle;
        p3_values(hit->lambda, s.coarse_phi);
      } else {
        s.coarse_triangle = -1;
        s.coarse_phi.fill(0.0);
        ++outside_;
      }
      samples_.push_back(s);
    }
  }
}

double SnapshotComparator::distance(const VelocityVector& coarse, const VelocityVector& fine) const {
  if (coarse.coefficients.size() != coarse_->n_vel_free() || fine.coefficients.size() != fine_->n_vel_free()) {
    throw InvalidArgument("SnapshotComparator: vector sizes do not match the spaces");
  }
  LocalVector fine_local, coarse_local;
  int fine_cached = -1, coarse_cached = -1;
  double sum = 0.0;
  for (const Sample& s : samples_) {
    if (s.fine_triangle != fine_cached) {
      gather_local(*fine_, fine, s.fine_triangle, fine_local);
      fine_cached = s.fine_triangle;
    }
    Vec2 d(0.0, 0.0);
    for (int a = 0; a < kP3LocalDofs; ++a) {
      d.x() += s.fine_phi[a] * fine_local[2 * a];
      d.y() += s.fine_phi[a] * fine_local[2 * a + 1];
    }
    if (s.coarse_triangle >= 0) {
      if (s.coarse_triangle != coarse_cached) {
        gather_local(*coarse_, coarse, s.coarse_triangle, coarse_local);
        coarse_cached = s.coarse_triangle;
      }
      for (int a = 0; a < kP3LocalDofs; ++a) {
        d.x() -= s.coarse_phi[a] * coarse_local[2 * a];
        d.y() -= s.coarse_phi[a] * coarse_local[2 * a + 1];
      }
    }
    sum += s.weight * d.squaredNorm();
  }
  return std::sqrt(sum);
}

double pathwise_uniform_error(const Trajectory& a, const Trajectory& b, int stride,
                              const SnapshotComparator* comparator) {
  if (stride < 1) throw InvalidArgument("pathwise_uniform_error: stride must be positive");
  if (a.config.T != b.config.T || b.config.J != a.config.J * stride) {
    throw InvalidArgument("pathwise_uniform_error: time grids are not aligned by the stride");
  }
  if (!comparator && (!a.space || !b.space || !a.space->same_dofs(*b.space))) {
    throw InvalidArgument("pathwise_uniform_error: trajectories live on different spaces; pass a comparator");
  }
  double worst = 0.0;
  for (std::size_t i = 1; i < a.snapshot_steps.size(); ++i) {
    const int j = a.snapshot_steps[i];
    const VelocityVector& ya = a.snapshots[i];
    const VelocityVector& yb = b.at_step(j * stride);
    double e = 0.0;
    if (comparator) {
      e = comparator->distance(ya, yb);
    } else {
      e = l2_norm(*a.space, VelocityVector{ya.coefficients - yb.coefficients});
    }
    worst = std::max(worst, e);
  }
  return worst;
}

SlopeFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("least_squares: need at least two points");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("least_squares: abscissae are all equal");
  SlopeFit fit;
  fit.points = static_cast<int>(x.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  fit.standard_error = x.size() > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
  return fit;
}

int ErrorStats::failures() const {
  int n = 0;
  for (const SampleRow& r : rows) n += r.failed ? 1 : 0;
  return n;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  workers = std::max(1, std::min(workers, n));
  std::vector<std::exception_ptr> errors(n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::min(v.size() - 1, rank == 0 ? 0 : rank - 1)];
}

void check_divides(int fine, int coarse) {
  if (coarse < 1 || fine % coarse != 0) {
    throw InvalidArgument("study: reference J must be a multiple of every level J");
  }
}

}  // namespace

ErrorStats run_study(const StudyConfig& cfg) {
  if (cfg.levels.empty()) throw InvalidArgument("study: no levels");
  if (cfg.seeds.empty()) throw InvalidArgument("study: no seeds");
  if (!cfg.reference.ops) throw InvalidArgument("study: no reference discretization");
  if (!cfg.initial) throw InvalidArgument("study: no initial condition");
  const int ref_j = cfg.reference.J;
  int snapshot_gcd = 0;
  for (const Discretization& d : cfg.levels) {
    if (!d.ops) throw InvalidArgument("study: level without operators");
    check_divides(ref_j, d.J);
    snapshot_gcd = std::gcd(snapshot_gcd, ref_j / d.J);
  }
  const NoiseModel model(cfg.noise);
  const int n_levels = static_cast<int>(cfg.levels.size());

  std::vector<std::unique_ptr<SnapshotComparator>> comparators(n_levels);
  std::vector<VelocityVector> y0(n_levels);
  for (int l = 0; l < n_levels; ++l) {
    const auto& ops = cfg.levels[l].ops;
    if (!ops->space().same_dofs(cfg.reference.ops->space())) {
      comparators[l] = std::make_unique<SnapshotComparator>(ops->space_ptr(), cfg.reference.ops->space_ptr());
    }
    y0[l] = project_initial(*ops, cfg.initial);
  }
  const VelocityVector y0_ref = project_initial(*cfg.reference.ops, cfg.initial);

  const int n_seeds = static_cast<int>(cfg.seeds.size());
  std::vector<std::vector<SampleRow>> per_seed(n_seeds);
  parallel_for(n_seeds, cfg.workers, [&](int i) {
    const std::uint64_t seed = cfg.seeds[i];
    std::vector<SampleRow> rows(n_levels);
    for (int l = 0; l < n_levels; ++l) {
      rows[l].seed = seed;
      rows[l].level = l;
      rows[l].h = cfg.levels[l].h();
      rows[l].tau = cfg.scheme.T / cfg.levels[l].J;
    }
    const BrownianPath path = sample_path(seed, ref_j, model.modes(), cfg.scheme.T / ref_j);
    SchemeConfig ref_cfg = cfg.scheme;
    ref_cfg.J = ref_j;
    ref_cfg.snapshot_stride = snapshot_gcd;
    Trajectory reference;
    try {
      reference = run_trajectory(cfg.reference.ops, ref_cfg, model, path, y0_ref);
    } catch (const Error& e) {
      for (SampleRow& r : rows) {
        r.failed = true;
        r.failure = std::string("reference: ") + e.what();
      }
      per_seed[i] = std::move(rows);
      return;
    }
    const double ref_h1 = reference.max_h1();
    for (int l = 0; l < n_levels; ++l) {
      SampleRow& row = rows[l];
      row.reference_max_h1 = ref_h1;
      const int factor = ref_j / cfg.levels[l].J;
      SchemeConfig level_cfg = cfg.scheme;
      level_cfg.J = cfg.levels[l].J;
      level_cfg.snapshot_stride = 1;
      try {
        const BrownianPath level_path = factor == 1 ? path : coarsen_path(path, factor);
        const Trajectory traj = run_trajectory(cfg.levels[l].ops, level_cfg, model, level_path, y0[l]);
        row.error = pathwise_uniform_error(traj, reference, factor, comparators[l].get());
        row.max_l2 = traj.max_l2();
        for (const StepReport& s : traj.steps) row.newton_iterations += s.iterations;
      } catch (const Error& e) {
        row.failed = true;
        row.failure = e.what();
      }
    }
    per_seed[i] = std::move(rows);
  });

  ErrorStats stats;
  stats.kind = cfg.kind;
  for (int l = 0; l < n_levels; ++l) {
    LevelSummary summary;
    summary.level = l;
    summary.h = cfg.levels[l].h();
    summary.J = cfg.levels[l].J;
    summary.tau = cfg.scheme.T / summary.J;
    std::vector<double> errors;
    double max_l2_sq = 0.0;
    for (int i = 0; i < n_seeds; ++i) {
      const SampleRow& row = per_seed[i][l];
      stats.rows.push_back(row);
      if (row.failed) {
        ++summary.failures;
        continue;
      }
      errors.push_back(row.error);
      summary.mean_square += row.error * row.error;
      max_l2_sq += row.max_l2 * row.max_l2;
    }
    summary.samples = static_cast<int>(errors.size());
    if (summary.samples > 0) {
      summary.mean_square /= summary.samples;
      summary.rms = std::sqrt(summary.mean_square);
      summary.mean_max_l2_squared = max_l2_sq / summary.samples;
    } else {
      summary.mean_square = summary.rms = summary.mean_max_l2_squared = std::nan("");
    }
    summary.median = quantile(errors, 0.5);
    summary.q90 = quantile(errors, 0.9);
    stats.levels.push_back(summary);
  }

  std::vector<double> x, y;
  for (const LevelSummary& s : stats.levels) {
    if (!(s.rms > 0.0)) continue;
    x.push_back(std::log2(cfg.kind == StudyKind::spatial ? s.h : s.tau));
    y.push_back(std::log2(s.rms));
  }
  if (x.size() >= 2) {
    bool distinct = false;
    for (double v : x) distinct = distinct || v != x.front();
    if (distinct) stats.fit = least_squares(x, y);
  }
  return stats;
}

ErrorStats temporal_study(const StudyConfig& cfg) {
  if (cfg.levels.size() < 3) throw InvalidArgument("temporal_study: at least 3 levels are required");
  int finest = 0;
  for (const Discretization& d : cfg.levels) {
    if (!d.ops || !cfg.reference.ops || !d.ops->space().same_dofs(cfg.reference.ops->space())) {
      throw InvalidArgument("temporal_study: all levels must share the reference mesh");
    }
    finest = std::max(finest, d.J);
  }
  if (cfg.reference.J < 4 * finest) throw InvalidArgument("temporal_study: reference must be >= 4x the finest level");
  StudyConfig c = cfg;
  c.kind = StudyKind::temporal;
  return run_study(c);
}

ErrorStats spatial_study(const StudyConfig& cfg) {
  if (cfg.levels.size() < 3) throw InvalidArgument("spatial_study: at least 3 levels are required");
  if (!cfg.reference.ops) throw InvalidArgument("spatial_study: no reference discretization");
  for (const Discretization& d : cfg.levels) {
    if (d.J != cfg.reference.J) throw InvalidArgument("spatial_study: tau must be identical on every level");
    if (!d.ops || d.ops->space().mesh().num_triangles() >= cfg.reference.ops->space().mesh().num_triangles()) {
      throw InvalidArgument("spatial_study: reference mesh must be finer than every level");
    }
  }
  StudyConfig c = cfg;
  c.kind = StudyKind::spatial;
  return run_study(c);
}

double LocalSetFilter::filtered_rms(const ErrorStats& stats, int level) const {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < stats.rows.size(); ++i) {
    if (stats.rows[i].level != level || !pass[i]) continue;
    sum += stats.rows[i].error * stats.rows[i].error;
    ++n;
  }
  return n > 0 ? std::sqrt(sum / n) : std::nan("");
}

LocalSetFilter local_set_filter(const ErrorStats& stats, double r_h, double r_h_tau) {
  LocalSetFilter filter;
  filter.r_h = r_h;
  filter.r_h_tau = r_h_tau;
  filter.pass.reserve(stats.rows.size());
  for (const SampleRow& r : stats.rows) {
    filter.pass.push_back(!r.failed && r.reference_max_h1 <= r_h && r.max_l2 <= r_h_tau);
  }
  return filter;
}

std::pair<double, double> wilson_interval(int k, int n, double z) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = n;
  const double p = k / nn;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
  const double half = z / (1.0 + z2 / nn) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

ExceedanceCurve exceedance_curve(const std::vector<double>& errors, double h, double tau, double alpha, double beta,
                                 const std::vector<double>& epsilon) {
  if (!(alpha > 2.0 && alpha < 3.0) || !(beta > 0.0 && beta < 1.0)) {
    throw InvalidArgument("exceedance_curve: need alpha in (2,3) and beta in (0,1)");
  }
  if (!(h > 0.0) || !(tau > 0.0)) throw InvalidArgument("exceedance_curve: h and tau must be positive");
  if (!std::is_sorted(epsilon.begin(), epsilon.end())) throw InvalidArgument("exceedance_curve: epsilon must ascend");
  ExceedanceCurve curve;
  curve.alpha = alpha;
  curve.beta = beta;
  curve.h = h;
  curve.tau = tau;
  curve.samples = static_cast<int>(errors.size());
  curve.epsilon = epsilon;
  const double scale = std::pow(h, alpha) + std::pow(tau, beta);
  std::vector<double> normalized;
  normalized.reserve(errors.size());
  for (double e : errors) normalized.push_back(e * e / scale);
  for (double eps : epsilon) {
    int k = 0;
    for (double v : normalized) k += v >= eps ? 1 : 0;
    const auto [lo, hi] = wilson_interval(k, curve.samples);
    curve.probability.push_back(curve.samples > 0 ? static_cast<double>(k) / curve.samples : 0.0);
    curve.lower.push_back(lo);
    curve.upper.push_back(hi);
  }
  return curve;
}

}  // namespace snse
