#pragma once

#include "rth/analytic.hpp"
#include "rth/colonization.hpp"
#include "rth/epidemic.hpp"
#include "rth/render.hpp"
#include "rth/snapshot.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace rth {

/// Bad or inconsistent configuration; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ModelKind { core, colonization, epidemic, oracle, equilibrium };

inline ModelKind model_from_name(const std::string& name) {
  if (name == "core") return ModelKind::core;
  if (name == "colonization") return ModelKind::colonization;
  if (name == "epidemic") return ModelKind::epidemic;
  if (name == "oracle") return ModelKind::oracle;
  if (name == "equilibrium") return ModelKind::equilibrium;
  throw ConfigError("scenario.model: unknown model '" + name + "'");
}

struct ScenarioConfig {
  ModelKind model = ModelKind::core;
  double length = 0;
  Index points = 0;
  std::map<std::string, double> params;
  std::map<std::string, std::string> init;
  double total_time = 0;
  double dt = 0;
  Index sample_every = 1;
  std::vector<double> times;  // oracle sampling instants
  std::filesystem::path directory = "out";
  std::set<std::string> formats = {"bin"};
  std::filesystem::path base_dir;  // directory of the config file
};

namespace detail {

inline double parse_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double value = 0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + text + "'");
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used != text.size())
    throw ConfigError(key + ": trailing characters in '" + text + "'");
  return value;
}

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_tokens(const std::string& s, char sep = ' ') {
  std::vector<std::string> out;
  std::string token;
  std::istringstream is(s);
  if (sep == ' ') {
    while (is >> token) out.push_back(token);
  } else {
    while (std::getline(is, token, sep)) {
      token = trim(token);
      if (!token.empty()) out.push_back(token);
    }
  }
  return out;
}

}  // namespace detail

/// Flat key=value sections: [scenario], [grid], [params], [init], [run],
/// [output]. `#` starts a comment.
inline ScenarioConfig parse_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());

  ScenarioConfig cfg;
  cfg.base_dir = path.has_parent_path() ? path.parent_path() : ".";
  std::string section, line;
  int line_no = 0;
  bool have_model = false, have_grid_l = false, have_grid_n = false;
  bool have_t = false, have_dt = false;

  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string at = path.filename().string() + ":" + std::to_string(line_no);

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at + ": unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(at + ": expected key = value, got '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(at + ": empty key or value");
    const std::string qualified = section + "." + key;

    if (section == "scenario" && key == "model") {
      cfg.model = model_from_name(value);
      have_model = true;
    } else if (section == "grid" && key == "L") {
      cfg.length = detail::parse_number(at + ": grid.L", value);
      have_grid_l = true;
    } else if (section == "grid" && key == "N") {
      cfg.points = static_cast<Index>(detail::parse_number(at + ": grid.N", value));
      have_grid_n = true;
    } else if (section == "params") {
      cfg.params[key] = detail::parse_number(at + ": params." + key, value);
    } else if (section == "init") {
      cfg.init[key] = value;
    } else if (section == "run" && key == "T") {
      cfg.total_time = detail::parse_number(at + ": run.T", value);
      have_t = true;
    } else if (section == "run" && key == "dt") {
      cfg.dt = detail::parse_number(at + ": run.dt", value);
      have_dt = true;
    } else if (section == "run" && key == "sample_every") {
      cfg.sample_every = static_cast<Index>(detail::parse_number(at + ": run.sample_every", value));
    } else if (section == "run" && key == "times") {
      for (const auto& item : detail::split_tokens(value, ','))
        cfg.times.push_back(detail::parse_number(at + ": run.times", item));
    } else if (section == "output" && key == "directory") {
      cfg.directory = value;
    } else if (section == "output" && key == "formats") {
      cfg.formats.clear();
      for (const auto& item : detail::split_tokens(value, ',')) {
        if (item != "bin" && item != "csv" && item != "png")
          throw ConfigError(at + ": output.formats: unknown format '" + item + "'");
        cfg.formats.insert(item);
      }
    } else {
      throw ConfigError(at + ": unknown key '" + qualified + "'");
    }
  }

  if (!have_model) throw ConfigError("scenario.model is required");
  if (!have_grid_l || !have_grid_n) throw ConfigError("grid.L and grid.N are required");
  const bool needs_run = cfg.model == ModelKind::core || cfg.model == ModelKind::colonization ||
                         cfg.model == ModelKind::epidemic;
  if (needs_run && (!have_t || !have_dt))
    throw ConfigError("run.T and run.dt are required for time-stepping models");
  if (cfg.model == ModelKind::oracle && cfg.times.empty())
    throw ConfigError("run.times is required for model = oracle");
  return cfg;
}

namespace detail {

inline double require_param(const ScenarioConfig& cfg, const std::string& name) {
  const auto it = cfg.params.find(name);
  if (it == cfg.params.end()) throw ConfigError("params." + name + " is required");
  return it->second;
}

inline double param_or(const ScenarioConfig& cfg, const std::string& name, double fallback) {
  const auto it = cfg.params.find(name);
  return it == cfg.params.end() ? fallback : it->second;
}

inline CoreParams core_params_from(const ScenarioConfig& cfg) {
  CoreParams p;
  p.alpha = require_param(cfg, "alpha");
  p.gamma = require_param(cfg, "gamma");
  p.epsilon = require_param(cfg, "epsilon");
  p.sigma = require_param(cfg, "sigma");
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

/// Periodized Gaussian of width `width` and mass `mass` centered at (c1, c2).
inline ScalarField gaussian_blob(const GridSpec& g, double c1, double c2, double width,
                                 double mass) {
  if (!(width > 0)) throw ConfigError("init: gaussian-blob width must be > 0");
  SpectralPlan plan(g);
  const Index n = g.points;
  Eigen::MatrixXcd coeffs(n, n);
  for (Index m1 = 0; m1 < n; ++m1)
    for (Index m2 = 0; m2 < n; ++m2) {
      const double k1 = plan.wavenumbers()[m1], k2 = plan.wavenumbers()[m2];
      const double amp = mass * std::exp(-0.5 * width * width * (k1 * k1 + k2 * k2));
      const double phase = -(k1 * c1 + k2 * c2);
      coeffs(m1, m2) = std::complex<double>(amp * std::cos(phase), amp * std::sin(phase));
    }
  return plan.synthesize(coeffs);
}

inline ScalarField build_scalar_init(const std::string& field, const std::string& spec,
                                     const GridSpec& g,
                                     const std::filesystem::path& base_dir) {
  const auto tokens = split_tokens(spec);
  const std::string key = "init." + field;
  if (tokens.empty()) throw ConfigError(key + ": empty init spec");
  const std::string& kind = tokens[0];
  const auto expect = [&](std::size_t n_args) {
    if (tokens.size() != n_args + 1)
      throw ConfigError(key + ": '" + kind + "' expects " + std::to_string(n_args) +
                        " arguments");
  };
  if (kind == "zero") {
    expect(0);
    return ScalarField::zero(g);
  }
  if (kind == "uniform") {
    expect(1);
    return ScalarField::constant(g, parse_number(key, tokens[1]));
  }
  if (kind == "gaussian-blob") {
    expect(4);
    return gaussian_blob(g, parse_number(key, tokens[1]), parse_number(key, tokens[2]),
                         parse_number(key, tokens[3]), parse_number(key, tokens[4]));
  }
  if (kind == "point-column") {
    expect(3);
    const auto i1 = static_cast<Index>(parse_number(key, tokens[1]));
    const auto i2 = static_cast<Index>(parse_number(key, tokens[2]));
    if (i1 < 0 || i1 >= g.points || i2 < 0 || i2 >= g.points)
      throw ConfigError(key + ": node index out of range");
    ScalarField f(g);
    f(i1, i2) = parse_number(key, tokens[3]) / g.cell_area();
    return f;
  }
  if (kind == "file") {
    expect(1);
    const auto snap = read_snapshot(base_dir / tokens[1]);
    if (snap.is_traveler) throw ConfigError(key + ": snapshot holds a traveler field");
    if (snap.grid() != g) throw ConfigError(key + ": snapshot grid differs from config grid");
    return snap.scalar;
  }
  throw ConfigError(key + ": unknown init preset '" + kind + "'");
}

inline TravelerField build_traveler_init(const std::string& field, const std::string& spec,
                                         const GridSpec& g, const ScalarField& paired,
                                         const CoreParams& params,
                                         const std::filesystem::path& base_dir) {
  const auto tokens = split_tokens(spec);
  const std::string key = "init." + field;
  if (tokens.empty()) throw ConfigError(key + ": empty init spec");
  const std::string& kind = tokens[0];
  if (kind == "zero") return TravelerField::zero(g);
  if (kind == "uniform") {
    if (tokens.size() != 2) throw ConfigError(key + ": 'uniform' expects one argument");
    return TravelerField::constant(g, parse_number(key, tokens[1]));
  }
  if (kind == "rho-times-scalar")
    return traveler_from_kernel(gaussian_rho(g, params.sigma), paired);
  if (kind == "equilibrium")
    return traveler_from_kernel(chi_kernel(params, g), paired);
  if (kind == "file") {
    if (tokens.size() != 2) throw ConfigError(key + ": 'file' expects one argument");
    auto snap = read_snapshot(base_dir / tokens[1]);
    if (!snap.is_traveler) throw ConfigError(key + ": snapshot holds a scalar field");
    if (snap.grid() != g) throw ConfigError(key + ": snapshot grid differs from config grid");
    if (snap.traveler.frame == Frame::lagrangian) return to_eulerian(snap.traveler);
    return snap.traveler;
  }
  throw ConfigError(key + ": unknown init preset '" + kind + "'");
}

inline std::string init_or(const ScenarioConfig& cfg, const std::string& field,
                           const std::string& fallback) {
  const auto it = cfg.init.find(field);
  return it == cfg.init.end() ? fallback : it->second;
}

}  // namespace detail

/// Everything one scenario run emits.
struct RunArtifacts {
  std::filesystem::path directory;
  std::vector<std::filesystem::path> files;  // relative to directory
};

namespace detail {

class Emitter {
 public:
  Emitter(const ScenarioConfig& cfg, const std::filesystem::path& dir)
      : cfg_(cfg), dir_(dir) {
    std::filesystem::create_directories(dir);
    manifest_["model"] = model_name();
    manifest_["grid"] = {{"N", cfg.points}, {"L", cfg.length}};
    manifest_["files"] = nlohmann::json::array();
  }

  std::string model_name() const {
    switch (cfg_.model) {
      case ModelKind::core: return "core";
      case ModelKind::colonization: return "colonization";
      case ModelKind::epidemic: return "epidemic";
      case ModelKind::oracle: return "oracle";
      case ModelKind::equilibrium: return "equilibrium";
    }
    return "?";
  }

  void field(const std::string& name, int sample, double t, const ScalarField& f) {
    const std::string stem = name + "_" + tag(sample);
    if (cfg_.formats.count("bin")) {
      write_snapshot(dir_ / (stem + ".bin"), f);
      note(stem + ".bin", name, t, "scalar", integral(f));
    }
    if (cfg_.formats.count("csv")) {
      write_csv(dir_ / (stem + ".csv"), f);
      note(stem + ".csv", name, t, "scalar", integral(f));
    }
    if (cfg_.formats.count("png")) {
      char title[64];
      std::snprintf(title, sizeof(title), "%s  t=%g", name.c_str(), t);
      render_heatmap(dir_ / (stem + ".png"), f, title);
      note(stem + ".png", name, t, "scalar", integral(f));
    }
  }

  void field(const std::string& name, int sample, double t, const TravelerField& v) {
    const std::string stem = name + "_" + tag(sample);
    const double mass = integral(integrate_position(v));
    if (cfg_.formats.count("bin")) {
      write_snapshot(dir_ / (stem + ".bin"), v);
      note(stem + ".bin", name, t, "traveler", mass);
    }
    if (cfg_.formats.count("csv")) {
      write_csv(dir_ / (stem + ".csv"), v);
      note(stem + ".csv", name, t, "traveler", mass);
    }
    // PNG needs a reduction choice; use `rthsim render --reduce=...` instead.
  }

  std::ofstream table(const std::string& filename) {
    note(filename, "", 0.0, "table", std::nullopt);
    std::ofstream os(dir_ / filename);
    if (!os) throw std::runtime_error("cannot open " + (dir_ / filename).string());
    return os;
  }

  void text_report(const std::string& filename, const std::string& body) {
    note(filename, "", 0.0, "report", std::nullopt);
    std::ofstream os(dir_ / filename);
    os << body;
  }

  RunArtifacts finish() {
    note("manifest.json", "", 0.0, "manifest", std::nullopt);
    std::ofstream os(dir_ / "manifest.json");
    if (!os) throw std::runtime_error("cannot write manifest");
    os << manifest_.dump(2) << '\n';
    RunArtifacts out;
    out.directory = dir_;
    for (const auto& entry : manifest_["files"]) out.files.emplace_back(entry["path"].get<std::string>());
    return out;
  }

 private:
  static std::string tag(int sample) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%04d", sample);
    return buf;
  }

  void note(const std::string& rel, const std::string& field_name, double t,
            const std::string& kind, std::optional<double> mass) {
    nlohmann::json entry{{"path", rel}, {"kind", kind}};
    if (!field_name.empty()) {
      entry["field"] = field_name;
      entry["t"] = t;
    }
    if (mass) entry["integral"] = *mass;
    manifest_["files"].push_back(entry);
  }

  const ScenarioConfig& cfg_;
  std::filesystem::path dir_;
  nlohmann::json manifest_;
};

inline void write_diagnostics(std::ofstream os, const std::vector<DiagnosticsRow>& rows) {
  os << "t,state_norm,conservation_residual,min_value\n";
  for (const auto& r : rows)
    os << full_precision(r.t) << ',' << full_precision(r.state_norm) << ','
       << full_precision(r.conservation_residual) << ',' << full_precision(r.min_value)
       << '\n';
}

}  // namespace detail

/// Execute one scenario and write its artifacts. Throws ConfigError for bad
/// configuration and runtime_error for solver aborts.
inline RunArtifacts run_scenario(const ScenarioConfig& cfg,
                                 const std::optional<std::filesystem::path>& out_override =
                                     std::nullopt) {
  GridSpec grid;
  try {
    grid = make_grid(cfg.length, cfg.points);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const CoreParams core = detail::core_params_from(cfg);

  std::filesystem::path dir = cfg.directory;
  if (out_override) dir = *out_override;
  if (const char* env = std::getenv("RTHSIM_OUTPUT_DIR")) dir = env;
  detail::Emitter emit(cfg, dir);

  const auto scalar_init = [&](const std::string& field, const std::string& fallback) {
    return detail::build_scalar_init(field, detail::init_or(cfg, field, fallback), grid,
                                     cfg.base_dir);
  };
  const auto traveler_init = [&](const std::string& field, const std::string& fallback,
                                 const ScalarField& paired) {
    return detail::build_traveler_init(field, detail::init_or(cfg, field, fallback), grid,
                                       paired, core, cfg.base_dir);
  };

  switch (cfg.model) {
    case ModelKind::core: {
      const auto u0 = scalar_init("u", "zero");
      const auto v0 = traveler_init("v", "zero", u0);
      const auto traj = simulate(CoreState(0.0, u0, v0), cfg.total_time, cfg.dt, core,
                                 cfg.sample_every);
      for (std::size_t k = 0; k < traj.states.size(); ++k) {
        emit.field("u", static_cast<int>(k), traj.states[k].t, traj.states[k].u);
        emit.field("v", static_cast<int>(k), traj.states[k].t, traj.states[k].v);
        emit.field("h", static_cast<int>(k), traj.states[k].t,
                   home_distribution(traj.states[k]));
        emit.field("w_total", static_cast<int>(k), traj.states[k].t,
                   total_distribution(traj.states[k], core));
      }
      detail::write_diagnostics(emit.table("diagnostics.csv"), traj.diagnostics);
      break;
    }
    case ModelKind::colonization: {
      ColonizationParams ext;
      ext.p = detail::require_param(cfg, "p");
      ext.beta = detail::param_or(cfg, "beta", 0.0);
      ext.mu = detail::param_or(cfg, "mu", 0.0);
      ext.kappa = detail::param_or(cfg, "kappa", 0.0);
      ext.nu = detail::param_or(cfg, "nu", 0.0);
      try {
        ext.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      const auto u0 = scalar_init("u", "zero");
      const auto v0 = traveler_init("v", "zero", u0);
      const auto traj = simulate_colonization(CoreState(0.0, u0, v0), cfg.total_time,
                                              cfg.dt, core, ext, cfg.sample_every);
      for (std::size_t k = 0; k < traj.states.size(); ++k) {
        emit.field("u", static_cast<int>(k), traj.states[k].t, traj.states[k].u);
        emit.field("v", static_cast<int>(k), traj.states[k].t, traj.states[k].v);
      }
      detail::write_diagnostics(emit.table("diagnostics.csv"), traj.diagnostics);
      break;
    }
    case ModelKind::epidemic: {
      EpidemicParams epi;
      epi.kappa1 = detail::param_or(cfg, "kappa1", 0.0);
      epi.kappa2 = detail::param_or(cfg, "kappa2", 0.0);
      epi.nu1 = detail::param_or(cfg, "nu1", 0.0);
      epi.nu2 = detail::param_or(cfg, "nu2", 0.0);
      try {
        epi.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      EpidemicState s0(grid);
      s0.s1 = scalar_init("s1", "zero");
      s0.i1 = scalar_init("i1", "zero");
      s0.s2 = traveler_init("s2", "zero", s0.s1);
      s0.i2 = traveler_init("i2", "zero", s0.i1);
      const auto traj =
          simulate_epidemic(s0, cfg.total_time, cfg.dt, core, epi, cfg.sample_every);
      for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const auto& s = traj.states[k];
        emit.field("s1", static_cast<int>(k), s.t, s.s1);
        emit.field("i1", static_cast<int>(k), s.t, s.i1);
        emit.field("s2", static_cast<int>(k), s.t, s.s2);
        emit.field("i2", static_cast<int>(k), s.t, s.i2);
      }
      {
        auto os = emit.table("diagnostics.csv");
        os << "t,state_norm,min_value,home_total_drift\n";
        for (std::size_t k = 0; k < traj.diagnostics.size(); ++k) {
          const auto& r = traj.diagnostics[k];
          const double drift =
              k == 0 ? 0.0
                     : (r.home_totals.values -
                        traj.diagnostics[k - 1].home_totals.values)
                           .maxCoeff();
          os << full_precision(r.t) << ',' << full_precision(r.state_norm) << ','
             << full_precision(r.min_value) << ',' << full_precision(drift) << '\n';
        }
      }
      {
        auto os = emit.table("epidemic_curve.csv");
        os << "t,total_s1,total_i1,total_s2,total_i2\n";
        for (const auto& r : traj.diagnostics)
          os << full_precision(r.t) << ',' << full_precision(r.total_s1) << ','
             << full_precision(r.total_i1) << ',' << full_precision(r.total_s2) << ','
             << full_precision(r.total_i2) << '\n';
      }
      break;
    }
    case ModelKind::oracle: {
      const auto u0 = scalar_init("u", "zero");
      const auto v0 = traveler_init("v", "zero", u0);
      ScalarField h0 = integrate_position(v0);
      h0.values += u0.values;
      int k = 0;
      for (double t : cfg.times) {
        if (t < 0) throw ConfigError("run.times: oracle times must be >= 0");
        emit.field("u", k, t, u_exact(t, u0, h0, core));
        emit.field("v", k, t, v_exact(t, u0, v0, h0, core));
        ++k;
      }
      break;
    }
    case ModelKind::equilibrium: {
      const auto u0 = scalar_init("u", "uniform 1");
      const auto v0 = traveler_init("v", "zero", u0);
      ScalarField h0 = integrate_position(v0);
      h0.values += u0.values;
      const auto eq = equilibrium(h0, core);
      emit.field("u_bar", 0, 0.0, eq.u_bar);
      emit.field("v_bar", 0, 0.0, eq.v_bar);

      SpectralPlan plan(grid);
      Eigen::MatrixXd residual =
          core.epsilon * core.epsilon *
          apply_axis_sum(eq.v_bar.values, plan.laplacian_axis_operator(), grid.points);
      residual -= core.alpha * eq.v_bar.values;
      ScalarField gain(grid);
      gain.values = core.gamma * eq.u_bar.values;
      residual += traveler_from_kernel(gaussian_rho(grid, core.sigma, false), gain).values;
      std::ostringstream report;
      report << "stationarity residual (sup norm): "
             << full_precision(residual.cwiseAbs().maxCoeff()) << "\n"
             << "traveler/home balance residual: "
             << full_precision((integrate_position(eq.v_bar).values -
                                core.gamma / core.alpha * eq.u_bar.values)
                                   .cwiseAbs()
                                   .maxCoeff())
             << "\n";
      emit.text_report("equilibrium_residual.txt", report.str());
      break;
    }
  }
  return emit.finish();
}

}  // namespace rth
