#include "snse/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "snse/errors.hpp"
#include "snse/report.hpp"
#include "snse/scheme.hpp"
#include "snse/stokes.hpp"

namespace snse {

namespace {

namespace fs = std::filesystem;

fs::path prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << content;
  if (!os) throw IoError("write to " + path.string() + " failed");
}

template <class F>
void write_with(const fs::path& path, F&& f) {
  std::ostringstream os;
  f(os);
  write_file(path, os.str());
}

double dot_m(const StokesOperators& ops, const VelocityVector& a, const VelocityVector& b) { return ops.inner(a, b); }

CheckResult skew_symmetry_check(const FaultInjection& fault) {
  CheckResult r{"skew_symmetry", false, 0.0, 1e-11, ""};
  ConvectionForm form;
  if (fault.convection_sign) form.divergence_weight = -0.5;
  const Mesh base = build_polygon_disk_mesh(8);
  int fields = 0;
  for (int level = 0; level < 2; ++level) {
    const auto s = build_space(refine_uniform(base, level));
    for (std::uint32_t k = 0; k < 20; ++k) {
      const VelocityVector u = gaussian_velocity(*s, 1000 + level, k);
      const double g = convection_residual(*s, u, form).values.dot(u.coefficients);
      const double advective = convection_residual(*s, u, ConvectionForm{0.0}).values.dot(u.coefficients);
      r.measured = std::max(r.measured, std::abs(g) / std::max(std::abs(advective), 1e-300));
      ++fields;
    }
  }
  r.pass = r.measured <= r.threshold;
  r.detail = std::to_string(fields) + " random fields, disk levels 0-1, relative to |<(u.grad)u,u>|";
  return r;
}

std::vector<CheckResult> projection_checks() {
  CheckResult idem{"projection_idempotence", false, 0.0, 1e-10, ""};
  CheckResult div{"projection_divergence", false, 0.0, 1e-10, ""};
  CheckResult sym{"stokes_symmetry", false, 0.0, 1e-11, ""};
  const Mesh base = build_polygon_disk_mesh(8);
  for (int level = 0; level < 2; ++level) {
    const auto ops = make_stokes_operators(build_space(refine_uniform(base, level)));
    for (std::uint32_t k = 0; k < 10; ++k) {
      const VelocityVector u = gaussian_velocity(ops->space(), 2000 + level, k);
      const VelocityVector pu = helmholtz_project(*ops, u);
      const VelocityVector ppu = helmholtz_project(*ops, pu);
      idem.measured = std::max(idem.measured, (ppu.coefficients - pu.coefficients).norm() / pu.coefficients.norm());
      div.measured = std::max(div.measured, ops->divergence_residual(pu) /
                                                std::max(ops->divergence_residual(u), 1e-300));
      const VelocityVector pv = helmholtz_project(*ops, gaussian_velocity(ops->space(), 3000 + level, k));
      const VelocityVector au = stokes_apply(*ops, pu), av = stokes_apply(*ops, pv);
      const double a = dot_m(*ops, au, pv), b = dot_m(*ops, pu, av);
      sym.measured = std::max(sym.measured, std::abs(a - b) / std::max(std::abs(a) + std::abs(b), 1e-300));
    }
  }
  idem.pass = idem.measured <= idem.threshold;
  div.pass = div.measured <= div.threshold;
  sym.pass = sym.measured <= sym.threshold;
  idem.detail = "||P(Pu) - Pu|| / ||Pu||, 20 random fields";
  div.detail = "||B Pu|| / ||B u||, 20 random fields";
  sym.detail = "|<A u, v> - <u, A v>| / (|<A u, v>| + |<u, A v>|)";
  return {idem, div, sym};
}

CheckResult manufactured_check() {
  CheckResult r{"manufactured_stokes_order", false, 0.0, 3.5, ""};
  const ManufacturedStokes m = manufactured_stokes_square();
  std::vector<double> lh, le;
  std::ostringstream detail;
  detail << "square n=2,4,8 velocity L2 errors";
  for (int n : {2, 4, 8}) {
    const auto ops = make_stokes_operators(build_space(build_unit_square_mesh(n)));
    const StokesSolution sol = solve_steady_stokes(*ops, m.force);
    const double e = l2_error(ops->space(), sol.velocity, m.velocity);
    lh.push_back(std::log2(ops->space().h()));
    le.push_back(std::log2(e));
    detail << ' ' << format_double(e);
  }
  r.measured = least_squares(lh, le).slope;
  r.pass = r.measured >= r.threshold;
  r.detail = detail.str();
  return r;
}

CheckResult jacobian_check() {
  CheckResult r{"convection_jacobian", false, 0.0, 1e-6, ""};
  const auto s = build_space(build_polygon_disk_mesh(8));
  const VelocityVector u = gaussian_velocity(*s, 4000);
  const VelocityVector w = gaussian_velocity(*s, 4001);
  const double eps = 1e-5;
  VelocityVector up{u.coefficients + eps * w.coefficients}, um{u.coefficients - eps * w.coefficients};
  const Eigen::VectorXd fd =
      (convection_residual(*s, up).values - convection_residual(*s, um).values) / (2.0 * eps);
  const Eigen::VectorXd jw = convection_jacobian(*s, u).matrix * w.coefficients;
  r.measured = (fd - jw).norm() / jw.norm();
  r.pass = r.measured <= r.threshold;
  r.detail = "central difference, step 1e-5";
  return r;
}

CheckResult hypothesis_check(const RunConfig& cfg) {
  CheckResult r{"noise_hypothesis", false, 0.0, 0.0, ""};
  NoiseParameters p = noise_parameters(cfg);
  if (p.c_scale == 0.0) p.c_scale = 1.0;
  const NoiseModel model(p);
  const HypothesisCheck h = check_hypothesis(model, 50, 50);
  r.measured = std::max(h.max_growth_ratio, h.max_lipschitz_ratio);
  r.threshold = h.bound;
  r.pass = h.ok();
  r.detail = "growth " + format_double(h.max_growth_ratio) + ", lipschitz " + format_double(h.max_lipschitz_ratio) +
             ", " + std::to_string(h.samples) + " samples";
  return r;
}

std::vector<Discretization> time_levels(const std::shared_ptr<const StokesOperators>& ops,
                                        const std::vector<int>& js) {
  std::vector<Discretization> out;
  for (int j : js) out.push_back({ops, j});
  return out;
}

StudyConfig base_study(const RunConfig& cfg) {
  StudyConfig s;
  s.scheme = scheme_config(cfg, cfg.J);
  s.noise = noise_parameters(cfg);
  s.initial = vortex_field(cfg.domain, cfg.amplitude);
  s.seeds = seeds(cfg);
  s.workers = cfg.workers;
  return s;
}

int finish_study(const RunConfig& cfg, const std::string& name, const ErrorStats& stats, std::ostream& out,
                 std::ostream& err) {
  const fs::path dir = prepare_dir(fs::path(cfg.out_dir) / name);
  const LocalSetFilter filter = local_set_filter(stats, cfg.r_h, cfg.r_h_tau);
  write_with(dir / "samples.tsv", [&](std::ostream& os) { write_sample_table(os, stats, cfg.r_h, cfg.r_h_tau); });
  write_with(dir / "levels.tsv", [&](std::ostream& os) { write_level_table(os, stats, filter); });
  const KeyValues summary = study_summary(stats, filter);
  write_with(dir / "summary.txt", [&](std::ostream& os) { write_summary(os, summary); });
  write_with(dir / "error.svg", [&](std::ostream& os) { write_error_plot(os, stats, name); });
  write_file(dir / "config.json", dump_config(cfg));
  write_summary(out, summary);
  if (stats.failures() > 0) {
    for (const SampleRow& row : stats.rows) {
      if (row.failed) err << "seed " << row.seed << " level " << row.level << ": " << row.failure << '\n';
    }
    err << stats.failures() << " sample(s) failed; see " << (dir / "samples.tsv").string() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace

std::vector<CheckResult> run_checks(const RunConfig& cfg, const FaultInjection& fault) {
  std::vector<CheckResult> out;
  out.push_back(skew_symmetry_check(fault));
  for (CheckResult& c : projection_checks()) out.push_back(std::move(c));
  out.push_back(manufactured_check());
  out.push_back(jacobian_check());
  out.push_back(hypothesis_check(cfg));
  return out;
}

int cmd_verify(const RunConfig& cfg, const FaultInjection& fault, std::ostream& out, std::ostream& err) {
  const std::vector<CheckResult> checks = run_checks(cfg, fault);
  nlohmann::json report = nlohmann::json::array();
  bool all = true;
  out << "check\tstatus\tmeasured\tthreshold\tdetail\n";
  for (const CheckResult& c : checks) {
    all = all && c.pass;
    report.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"measured", c.measured},
                      {"threshold", c.threshold},
                      {"detail", c.detail}});
    out << c.name << '\t' << (c.pass ? "pass" : "FAIL") << '\t' << format_double(c.measured) << '\t'
        << format_double(c.threshold) << '\t' << c.detail << '\n';
  }
  const fs::path dir = prepare_dir(cfg.out_dir);
  write_file(dir / "verify.json", nlohmann::json{{"pass", all}, {"checks", report}}.dump(2) + "\n");
  if (all) return kExitOk;
  for (const CheckResult& c : checks) {
    if (!c.pass) err << "failed check: " << c.name << '\n';
  }
  return kExitNumerical;
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
  const auto ops = make_stokes_operators(build_space(build_mesh(cfg, cfg.mesh_level)));
  const NoiseModel model(noise_parameters(cfg));
  const SchemeConfig scheme = scheme_config(cfg, cfg.J);
  const VelocityVector y0 = project_initial(*ops, vortex_field(cfg.domain, cfg.amplitude));
  const Trajectory traj = run_trajectory(ops, scheme, model, cfg.seed_first, y0);

  const fs::path dir = prepare_dir(fs::path(cfg.out_dir) / "run");
  if (cfg.save_trajectory) save_trajectory(traj, (dir / "trajectory.snse").string());
  write_with(dir / "norms.tsv", [&](std::ostream& os) {
    os << "j\tt\tl2\th1\tnewton_iterations\tresidual\tdivergence\n";
    for (int j = 0; j <= scheme.J; ++j) {
      os << j << '\t' << format_double(scheme.tau() * j) << '\t' << format_double(traj.l2_norms[j]) << '\t'
         << format_double(traj.h1_norms[j]);
      if (j == 0) {
        os << "\t0\t0\t" << format_double(ops->divergence_residual(y0)) << '\n';
      } else {
        const StepReport& s = traj.steps[j - 1];
        os << '\t' << s.iterations << '\t' << format_double(s.residual) << '\t' << format_double(s.divergence)
           << '\n';
      }
    }
  });
  int iterations = 0, factorizations = 0;
  for (const StepReport& s : traj.steps) {
    iterations += s.iterations;
    factorizations += s.factorizations;
  }
  const KeyValues summary{{"mesh_hash", traj.mesh_hash},
                          {"triangles", std::to_string(ops->space().mesh().num_triangles())},
                          {"h", format_double(ops->space().h())},
                          {"velocity_dofs", std::to_string(ops->space().n_vel_free())},
                          {"T", format_double(scheme.T)},
                          {"J", std::to_string(scheme.J)},
                          {"seed", std::to_string(cfg.seed_first)},
                          {"max_l2", format_double(traj.max_l2())},
                          {"max_h1", format_double(traj.max_h1())},
                          {"final_l2", format_double(traj.l2_norms.back())},
                          {"newton_iterations", std::to_string(iterations)},
                          {"factorizations", std::to_string(factorizations)}};
  write_with(dir / "summary.txt", [&](std::ostream& os) { write_summary(os, summary); });
  write_file(dir / "config.json", dump_config(cfg));
  write_summary(out, summary);
  return kExitOk;
}

int cmd_converge_time(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto ops = make_stokes_operators(build_space(build_mesh(cfg, cfg.mesh_level)));
  StudyConfig study = base_study(cfg);
  study.levels = time_levels(ops, cfg.time_levels);
  study.reference = {ops, cfg.reference_J};
  return finish_study(cfg, "converge-time", temporal_study(study), out, err);
}

int cmd_converge_space(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  StudyConfig study = base_study(cfg);
  for (int level : cfg.space_levels) {
    study.levels.push_back({make_stokes_operators(build_space(build_mesh(cfg, level))), cfg.J});
  }
  study.reference = {make_stokes_operators(build_space(build_mesh(cfg, cfg.reference_level))), cfg.J};
  return finish_study(cfg, "converge-space", spatial_study(study), out, err);
}

int cmd_exceedance(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  StudyConfig study = base_study(cfg);
  study.kind = StudyKind::coupled;
  for (const PairSpec& p : cfg.pairs) {
    study.levels.push_back({make_stokes_operators(build_space(build_mesh(cfg, p.level))), p.J});
  }
  study.reference = {make_stokes_operators(build_space(build_mesh(cfg, cfg.exceedance_reference.level))),
                     cfg.exceedance_reference.J};
  const ErrorStats stats = run_study(study);

  std::vector<ExceedanceCurve> curves;
  for (const LevelSummary& level : stats.levels) {
    std::vector<double> errors;
    for (const SampleRow& row : stats.rows) {
      if (row.level == level.level && !row.failed) errors.push_back(row.error);
    }
    curves.push_back(exceedance_curve(errors, level.h, level.tau, cfg.alpha, cfg.beta, cfg.epsilon));
  }
  const fs::path dir = prepare_dir(fs::path(cfg.out_dir) / "exceedance");
  write_with(dir / "exceedance.tsv", [&](std::ostream& os) { write_exceedance_table(os, curves); });
  write_with(dir / "exceedance.svg", [&](std::ostream& os) { write_exceedance_plot(os, curves, "exceedance"); });
  const int code = finish_study(cfg, "exceedance", stats, out, err);
  return code;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite element solver and convergence laboratory for the stochastic Navier-Stokes equations", "snse"};
  app.require_subcommand(1);
  std::string config_path, seed_text, seeds_text, out_dir, fault;
  std::optional<int> workers, level;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed_text, "single seed");
  app.add_option("--seeds", seeds_text, "seed range A..B");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--level", level, "mesh refinement level")->check(CLI::NonNegativeNumber);
  app.add_option("--inject-fault", fault)->group("");
  app.fallthrough();
  CLI::App* verify = app.add_subcommand("verify", "invariant and verification checks");
  CLI::App* run = app.add_subcommand("run", "one trajectory with norms and snapshots");
  CLI::App* time = app.add_subcommand("converge-time", "temporal convergence study");
  CLI::App* space = app.add_subcommand("converge-space", "spatial convergence study");
  CLI::App* exceed = app.add_subcommand("exceedance", "exceedance probabilities for (h, tau) pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (!seed_text.empty()) {
      const auto [a, b] = parse_seed_range(seed_text);
      if (a != b) throw ConfigError("--seed takes a single seed");
      cfg.seed_first = cfg.seed_last = a;
    }
    if (!seeds_text.empty()) std::tie(cfg.seed_first, cfg.seed_last) = parse_seed_range(seeds_text);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (workers) cfg.workers = *workers;
    if (level) cfg.mesh_level = *level;
    validate_config(cfg);
    FaultInjection injection;
    if (fault == "convection-sign") {
      injection.convection_sign = true;
    } else if (!fault.empty()) {
      throw ConfigError("unknown fault '" + fault + "'");
    }

    if (verify->parsed()) return cmd_verify(cfg, injection, out, err);
    if (run->parsed()) return cmd_run(cfg, out, err);
    if (time->parsed()) return cmd_converge_time(cfg, out, err);
    if (space->parsed()) return cmd_converge_space(cfg, out, err);
    if (exceed->parsed()) return cmd_exceedance(cfg, out, err);
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidMesh& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::bad_alloc&) {
    err << "numerical failure: out of memory\n";
    return kExitNumerical;
  }
}

}  // namespace snse
