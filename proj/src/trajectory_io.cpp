#include <cstring>
#include <fstream>

#include <json.hpp>

#include "snse/errors.hpp"
#include "snse/scheme.hpp"

namespace snse {

namespace {

constexpr char kMagic[8] = {'S', 'N', 'S', 'E', 'T', 'R', 'J', '1'};

nlohmann::ordered_json config_to_json(const SchemeConfig& cfg) {
  nlohmann::ordered_json j;
  j["T"] = cfg.T;
  j["J"] = cfg.J;
  j["newton_tol"] = cfg.newton_tol;
  j["newton_max_iters"] = cfg.newton_max_iters;
  j["max_halvings"] = cfg.max_halvings;
  j["solver"] = cfg.solver == NonlinearSolver::newton ? "newton" : "picard";
  j["convection"] = cfg.convection;
  j["divergence_weight"] = cfg.form.divergence_weight;
  j["store_pressure"] = cfg.store_pressure;
  j["snapshot_stride"] = cfg.snapshot_stride;
  return j;
}

SchemeConfig config_from_json(const nlohmann::ordered_json& j) {
  SchemeConfig cfg;
  cfg.T = j.at("T").get<double>();
  cfg.J = j.at("J").get<int>();
  cfg.newton_tol = j.at("newton_tol").get<double>();
  cfg.newton_max_iters = j.at("newton_max_iters").get<int>();
  cfg.max_halvings = j.at("max_halvings").get<int>();
  cfg.solver = j.at("solver").get<std::string>() == "picard" ? NonlinearSolver::picard : NonlinearSolver::newton;
  cfg.convection = j.at("convection").get<bool>();
  cfg.form.divergence_weight = j.at("divergence_weight").get<double>();
  cfg.store_pressure = j.at("store_pressure").get<bool>();
  cfg.snapshot_stride = j.at("snapshot_stride").get<int>();
  return cfg;
}

template <class T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void put_array(std::ostream& os, const double* data, std::size_t n) {
  put<std::uint64_t>(os, n);
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

template <class T>
T get(std::istream& is) {
  T value{};
  if (!is.read(reinterpret_cast<char*>(&value), sizeof(T))) throw IoError("trajectory file truncated");
  return value;
}

std::vector<double> get_array(std::istream& is) {
  const auto n = get<std::uint64_t>(is);
  if (n > (std::uint64_t{1} << 32)) throw IoError("trajectory file: implausible array length");
  std::vector<double> out(n);
  if (n > 0 && !is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(n * sizeof(double)))) {
    throw IoError("trajectory file truncated");
  }
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string config_json(const SchemeConfig& cfg) { return config_to_json(cfg).dump(); }

void save_trajectory(const Trajectory& traj, const std::string& path) {
  nlohmann::ordered_json header;
  header["mesh_hash"] = traj.mesh_hash;
  header["seed"] = traj.seed;
  header["config"] = config_to_json(traj.config);
  header["model"] = nlohmann::ordered_json::parse(traj.model.empty() ? "{}" : traj.model);
  header["snapshot_steps"] = traj.snapshot_steps;
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const StepReport& r : traj.steps) {
    steps.push_back({{"iterations", r.iterations},
                     {"halvings", r.halvings},
                     {"residual", r.residual},
                     {"tolerance", r.tolerance},
                     {"divergence", r.divergence},
                     {"history", r.history}});
  }
  header["steps"] = std::move(steps);
  const std::string text = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(kMagic, sizeof(kMagic));
  put<std::uint64_t>(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  put<std::uint64_t>(os, traj.snapshots.size());
  for (const VelocityVector& v : traj.snapshots) put_array(os, v.coefficients.data(), v.coefficients.size());
  put<std::uint64_t>(os, traj.pressures.size());
  for (const PressureVector& p : traj.pressures) put_array(os, p.coefficients.data(), p.coefficients.size());
  put_array(os, traj.l2_norms.data(), traj.l2_norms.size());
  put_array(os, traj.h1_norms.data(), traj.h1_norms.size());
  if (!os) throw IoError("write failed for " + path);
}

Trajectory load_trajectory(const std::string& path, std::shared_ptr<const TaylorHoodSpace> space) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[sizeof(kMagic)];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError(path + ": not a trajectory file");
  }
  const auto len = get<std::uint64_t>(is);
  if (len > (std::uint64_t{1} << 30)) throw IoError(path + ": implausible header length");
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len))) throw IoError(path + ": truncated header");

  Trajectory traj;
  try {
    const nlohmann::ordered_json header = nlohmann::ordered_json::parse(text);
    traj.mesh_hash = header.at("mesh_hash").get<std::string>();
    traj.seed = header.at("seed").get<std::uint64_t>();
    traj.config = config_from_json(header.at("config"));
    traj.model = header.at("model").dump();
    traj.snapshot_steps = header.at("snapshot_steps").get<std::vector<int>>();
    for (const auto& r : header.at("steps")) {
      StepReport rep;
      rep.iterations = r.at("iterations").get<int>();
      rep.halvings = r.at("halvings").get<int>();
      rep.residual = r.at("residual").get<double>();
      rep.tolerance = r.at("tolerance").get<double>();
      rep.divergence = r.at("divergence").get<double>();
      rep.history = r.at("history").get<std::vector<double>>();
      traj.steps.push_back(std::move(rep));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": malformed header: " + e.what());
  }
  if (space && traj.mesh_hash != space->mesh().hash_hex()) {
    throw InvalidArgument(path + ": trajectory mesh hash " + traj.mesh_hash + " does not match the space");
  }
  traj.space = std::move(space);

  const auto n_snap = get<std::uint64_t>(is);
  if (n_snap != traj.snapshot_steps.size()) throw IoError(path + ": snapshot count mismatch");
  for (std::uint64_t i = 0; i < n_snap; ++i) {
    VelocityVector v{to_vector(get_array(is))};
    if (traj.space && v.coefficients.size() != traj.space->n_vel_free()) throw IoError(path + ": snapshot size");
    traj.snapshots.push_back(std::move(v));
  }
  const auto n_press = get<std::uint64_t>(is);
  for (std::uint64_t i = 0; i < n_press; ++i) traj.pressures.push_back(PressureVector{to_vector(get_array(is))});
  traj.l2_norms = get_array(is);
  traj.h1_norms = get_array(is);
  return traj;
}

}  // namespace snse
