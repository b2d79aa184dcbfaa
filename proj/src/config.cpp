#include "snse/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "snse/errors.hpp"

namespace snse {

namespace {

using Json = nlohmann::ordered_json;

/// Reads the keys of one JSON object and rejects any key nobody asked for.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "must be an object");
  }
  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown key " + path_ + (path_.empty() ? "" : ".") + k);
    }
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(where() + key + " has the wrong type");
    }
  }

  void read_number(const char* key, double& out, bool null_is_infinity = false) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const Json& v = j_.at(key);
    if (v.is_null() && null_is_infinity) {
      out = std::numeric_limits<double>::infinity();
    } else if (v.is_number()) {
      out = v.get<double>();
    } else {
      throw ConfigError(where() + key + " must be a number");
    }
  }

  void read_int(const char* key, int& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (!j_.at(key).is_number_integer()) throw ConfigError(where() + key + " must be an integer");
    out = j_.at(key).get<int>();
  }

  template <class F>
  void child(const char* key, F&& body) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Section s(j_.at(key), path_.empty() ? key : path_ + "." + key);
    body(s);
    s.finish();
  }

  const Json* raw(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

 private:
  [[nodiscard]] std::string where() const { return path_.empty() ? "" : path_ + "."; }
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<int> int_list(const Json* j, const char* name) {
  if (!j->is_array()) throw ConfigError(std::string(name) + " must be a list of integers");
  std::vector<int> out;
  for (const auto& v : *j) {
    if (!v.is_number_integer()) throw ConfigError(std::string(name) + " must be a list of integers");
    out.push_back(v.get<int>());
  }
  return out;
}

std::vector<double> number_list(const Json* j, const char* name) {
  if (!j->is_array()) throw ConfigError(std::string(name) + " must be a list of numbers");
  std::vector<double> out;
  for (const auto& v : *j) {
    if (!v.is_number()) throw ConfigError(std::string(name) + " must be a list of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

PairSpec pair_spec(const Json& j, const std::string& path) {
  PairSpec p;
  Section s(j, path);
  s.read_int("level", p.level);
  s.read_int("J", p.J);
  s.finish();
  return p;
}

template <class E>
E parse_enum(const std::string& text, std::initializer_list<std::pair<const char*, E>> options, const char* key) {
  for (const auto& [name, value] : options) {
    if (text == name) return value;
  }
  throw ConfigError(std::string("invalid value '") + text + "' for " + key);
}

Json encode_number(double v) { return std::isinf(v) ? Json(nullptr) : Json(v); }

}  // namespace

RunConfig parse_config(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  {
    Section s(root, "");
    s.child("mesh", [&](Section& m) {
      std::string domain = cfg.domain == Domain::disk ? "disk" : "square";
      m.read("domain", domain);
      cfg.domain = parse_enum<Domain>(domain, {{"disk", Domain::disk}, {"square", Domain::square}}, "mesh.domain");
      m.read_int("base", cfg.mesh_base);
      m.read_int("level", cfg.mesh_level);
      if (const Json* l = m.raw("levels")) cfg.space_levels = int_list(l, "mesh.levels");
      m.read_int("reference_level", cfg.reference_level);
    });
    s.child("time", [&](Section& t) {
      t.read_number("T", cfg.T);
      t.read_int("J", cfg.J);
      if (const Json* l = t.raw("levels")) cfg.time_levels = int_list(l, "time.levels");
      t.read_int("reference_J", cfg.reference_J);
    });
    s.child("noise", [&](Section& n) {
      std::string family = cfg.family == NoiseFamily::standard ? "standard" : "divergence-free";
      n.read("family", family);
      cfg.family = parse_enum<NoiseFamily>(
          family, {{"standard", NoiseFamily::standard}, {"divergence-free", NoiseFamily::divergence_free}},
          "noise.family");
      n.read_int("modes", cfg.modes);
      n.read_number("c_scale", cfg.c_scale);
      n.read_number("decay", cfg.decay);
      n.read_number("coupling", cfg.coupling);
      n.read_number("saturation", cfg.saturation);
    });
    s.child("initial", [&](Section& i) { i.read_number("amplitude", cfg.amplitude); });
    s.child("solver", [&](Section& v) {
      v.read_number("newton_tol", cfg.newton_tol);
      v.read_int("max_iters", cfg.newton_max_iters);
      v.read_int("max_halvings", cfg.max_halvings);
      std::string method = cfg.solver == NonlinearSolver::newton ? "newton" : "picard";
      v.read("method", method);
      cfg.solver = parse_enum<NonlinearSolver>(
          method, {{"newton", NonlinearSolver::newton}, {"picard", NonlinearSolver::picard}}, "solver.method");
      v.read("jacobian_reuse", cfg.jacobian_reuse);
    });
    s.child("study", [&](Section& st) {
      if (const Json* sd = st.raw("seeds")) {
        if (sd->is_string()) {
          std::tie(cfg.seed_first, cfg.seed_last) = parse_seed_range(sd->get<std::string>());
        } else if (sd->is_number_unsigned()) {
          cfg.seed_first = cfg.seed_last = sd->get<std::uint64_t>();
        } else {
          throw ConfigError("study.seeds must be \"A..B\" or a non-negative integer");
        }
      }
      st.read_number("alpha", cfg.alpha);
      st.read_number("beta", cfg.beta);
      if (const Json* e = st.raw("epsilon")) cfg.epsilon = number_list(e, "study.epsilon");
      if (const Json* p = st.raw("pairs")) {
        if (!p->is_array()) throw ConfigError("study.pairs must be a list");
        cfg.pairs.clear();
        for (std::size_t i = 0; i < p->size(); ++i) {
          cfg.pairs.push_back(pair_spec((*p)[i], "study.pairs[" + std::to_string(i) + "]"));
        }
      }
      if (const Json* r = st.raw("reference")) cfg.exceedance_reference = pair_spec(*r, "study.reference");
      st.read_number("r_h", cfg.r_h, true);
      st.read_number("r_h_tau", cfg.r_h_tau, true);
    });
    s.child("output", [&](Section& o) {
      o.read("directory", cfg.out_dir);
      o.read_int("workers", cfg.workers);
      o.read("save_trajectory", cfg.save_trajectory);
    });
    s.finish();
  }
  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& cfg) {
  Json root;
  root["mesh"] = {{"domain", cfg.domain == Domain::disk ? "disk" : "square"},
                  {"base", cfg.mesh_base},
                  {"level", cfg.mesh_level},
                  {"levels", cfg.space_levels},
                  {"reference_level", cfg.reference_level}};
  root["time"] = {{"T", cfg.T}, {"J", cfg.J}, {"levels", cfg.time_levels}, {"reference_J", cfg.reference_J}};
  root["noise"] = {{"family", cfg.family == NoiseFamily::standard ? "standard" : "divergence-free"},
                   {"modes", cfg.modes},
                   {"c_scale", cfg.c_scale},
                   {"decay", cfg.decay},
                   {"coupling", cfg.coupling},
                   {"saturation", cfg.saturation}};
  root["initial"] = {{"amplitude", cfg.amplitude}};
  root["solver"] = {{"newton_tol", cfg.newton_tol},
                    {"max_iters", cfg.newton_max_iters},
                    {"max_halvings", cfg.max_halvings},
                    {"method", cfg.solver == NonlinearSolver::newton ? "newton" : "picard"},
                    {"jacobian_reuse", cfg.jacobian_reuse}};
  Json pairs = Json::array();
  for (const PairSpec& p : cfg.pairs) pairs.push_back({{"level", p.level}, {"J", p.J}});
  root["study"] = {{"seeds", std::to_string(cfg.seed_first) + ".." + std::to_string(cfg.seed_last)},
                   {"alpha", cfg.alpha},
                   {"beta", cfg.beta},
                   {"epsilon", cfg.epsilon},
                   {"pairs", pairs},
                   {"reference", {{"level", cfg.exceedance_reference.level}, {"J", cfg.exceedance_reference.J}}},
                   {"r_h", encode_number(cfg.r_h)},
                   {"r_h_tau", encode_number(cfg.r_h_tau)}};
  root["output"] = {{"directory", cfg.out_dir}, {"workers", cfg.workers}, {"save_trajectory", cfg.save_trajectory}};
  return root.dump(2) + "\n";
}

void validate_config(const RunConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
  };
  require(c.domain == Domain::disk ? c.mesh_base >= 8 : c.mesh_base >= 1, "mesh.base too small for the domain");
  require(c.mesh_level >= 0 && c.reference_level >= 0, "mesh levels must be non-negative");
  for (int l : c.space_levels) require(l >= 0 && l < c.reference_level, "mesh.levels must lie below reference_level");
  require(c.T > 0.0 && std::isfinite(c.T), "time.T must be positive");
  require(c.J >= 1 && c.reference_J >= 1, "time.J and time.reference_J must be positive");
  for (int j : c.time_levels) require(j >= 1 && c.reference_J % j == 0, "time.levels must divide time.reference_J");
  require(c.modes >= 1, "noise.modes must be at least 1");
  require(c.c_scale >= 0.0, "noise.c_scale must be non-negative");
  require(c.decay > 0.5, "noise.decay must exceed 1/2");
  require(c.coupling >= 0.0 && c.saturation > 0.0, "noise.coupling >= 0 and noise.saturation > 0");
  require(c.newton_tol > 0.0 && c.newton_max_iters >= 1 && c.max_halvings >= 0, "solver settings");
  require(c.seed_first <= c.seed_last, "study.seeds must be ascending");
  require(!c.epsilon.empty(), "study.epsilon must not be empty");
  for (std::size_t i = 1; i < c.epsilon.size(); ++i) require(c.epsilon[i] > c.epsilon[i - 1], "study.epsilon must ascend");
  for (const PairSpec& p : c.pairs) {
    require(p.level >= 0 && p.J >= 1, "study.pairs entries need level >= 0 and J >= 1");
    require(c.exceedance_reference.J % p.J == 0, "study.pairs J must divide study.reference.J");
    require(p.level < c.exceedance_reference.level || p.J < c.exceedance_reference.J,
            "study.reference must be finer than every pair");
  }
  require(c.r_h >= 0.0 && c.r_h_tau >= 0.0, "study.r_h and study.r_h_tau must be non-negative");
  require(c.workers >= 1, "output.workers must be at least 1");
  require(!c.out_dir.empty(), "output.directory must not be empty");
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  auto parse = [&](const std::string& s) -> std::uint64_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("invalid seed '" + s + "'");
    }
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw ConfigError("invalid seed '" + s + "'");
    }
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const auto v = parse(text);
    return {v, v};
  }
  const auto a = parse(text.substr(0, dots)), b = parse(text.substr(dots + 2));
  if (a > b) throw ConfigError("seed range " + text + " is descending");
  return {a, b};
}

Mesh build_mesh(const RunConfig& cfg, int level) {
  Mesh base = cfg.domain == Domain::disk ? build_polygon_disk_mesh(cfg.mesh_base) : build_unit_square_mesh(cfg.mesh_base);
  return level > 0 ? refine_uniform(base, level) : base;
}

SchemeConfig scheme_config(const RunConfig& cfg, int J) {
  SchemeConfig s;
  s.T = cfg.T;
  s.J = J;
  s.newton_tol = cfg.newton_tol;
  s.newton_max_iters = cfg.newton_max_iters;
  s.max_halvings = cfg.max_halvings;
  s.solver = cfg.solver;
  s.jacobian_reuse = cfg.jacobian_reuse;
  return s;
}

NoiseParameters noise_parameters(const RunConfig& cfg) {
  NoiseParameters p;
  p.family = cfg.family;
  p.modes = cfg.modes;
  p.c_scale = cfg.c_scale;
  p.decay = cfg.decay;
  p.coupling = cfg.coupling;
  p.saturation = cfg.saturation;
  p.domain = cfg.domain;
  return p;
}

std::vector<std::uint64_t> seeds(const RunConfig& cfg) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = cfg.seed_first;; ++s) {
    out.push_back(s);
    if (s == cfg.seed_last) break;
  }
  return out;
}

}  // namespace snse
