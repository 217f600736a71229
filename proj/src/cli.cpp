#include "hyqsim/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyqsim/chip.hpp"
#include "hyqsim/distillation.hpp"
#include "hyqsim/quantum.hpp"
#include "hyqsim/states.hpp"
#include "hyqsim/tomography.hpp"

namespace hyqsim::cli {

namespace {

using nlohmann::json;

// Configuration problems exit with code 2; anything failing later exits 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

int line_of_byte(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

json parse_config_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& err) {
    const std::size_t byte = err.byte > 0 ? err.byte - 1 : 0;
    throw ConfigError(origin + ":" + std::to_string(line_of_byte(text, byte)) + ": " +
                      err.what());
  }
}

json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const json config = parse_config_text(buffer.str(), path);
  if (!config.is_object()) throw ConfigError(path + ": config must be a JSON object");
  return config;
}

// KEY=VALUE with dotted keys descending into objects; VALUE is parsed as
// JSON and falls back to a plain string.
void apply_override(json& config, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set expects KEY=VALUE, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string value_text = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(value_text);
  } catch (const json::parse_error&) {
    value = value_text;
  }

  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("--set key '" + key + "' has an empty segment");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      break;
    }
    json& child = (*node)[part];
    if (!child.is_object() && !child.is_null())
      throw ConfigError("--set key '" + key + "' descends into a non-object");
    node = &child;
    start = dot + 1;
  }
}

struct PGrid {
  double start = 0.0;
  double stop = 1.0;
  int count = 101;
};

struct RunConfig {
  std::string state = "hyper";
  std::optional<PumpConfig> pump;
  SourceModel source;
  double noise_lambda = 1.0;
  long long shots = 1000000;
  std::optional<std::uint64_t> seed;
  std::string projectors = "complete";
  long long resamples = 200;
  PGrid p_grid;
  int phase_points = 256;
  double rhom_visibility = 1.0;
  Photon flip_photon = Photon::idler;
  std::string distill_method = "stabilizer";
  std::string out = "out";
};

double require_number(const json& value, const std::string& key) {
  if (!value.is_number()) throw ConfigError("config key '" + key + "' must be a number");
  return value.get<double>();
}

long long require_integer(const json& value, const std::string& key) {
  if (!value.is_number_integer())
    throw ConfigError("config key '" + key + "' must be an integer");
  return value.get<long long>();
}

std::string require_string(const json& value, const std::string& key) {
  if (!value.is_string()) throw ConfigError("config key '" + key + "' must be a string");
  return value.get<std::string>();
}

Complex complex_from_json(const json& value, const std::string& key) {
  if (value.is_number()) return Complex(value.get<double>(), 0.0);
  if (value.is_array() && value.size() == 2 && value.at(0).is_number() &&
      value.at(1).is_number())
    return Complex(value.at(0).get<double>(), value.at(1).get<double>());
  throw ConfigError("config key '" + key + "' entries must be numbers or [re, im] pairs");
}

RunConfig extract_config(const json& config, const std::string& command) {
  static const std::set<std::string> known = {
      "experiment",  "state",         "pump",          "visibility",
      "efficiency",  "intermodal_weight", "noise_lambda", "shots",
      "seed",        "projectors",    "resamples",     "p_grid",
      "phase_points", "rhom_visibility", "flip_photon", "distill_method",
      "out"};
  for (const auto& item : config.items())
    if (!known.count(item.key()))
      throw ConfigError("config key '" + item.key() + "' is not recognized");

  RunConfig cfg;

  if (config.contains("experiment")) {
    const std::string experiment = require_string(config["experiment"], "experiment");
    if (experiment != command)
      throw ConfigError("config is for experiment '" + experiment +
                        "' but the command is '" + command + "'");
  }

  if (config.contains("state")) cfg.state = require_string(config["state"], "state");
  if (cfg.state != "chip") {
    try {
      state_by_name(cfg.state);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(std::string("config key 'state': ") + err.what());
    }
  }

  if (config.contains("pump")) {
    const json& pump = config["pump"];
    if (!pump.is_array() || pump.size() != 4)
      throw ConfigError("config key 'pump' must be an array of 4 amplitudes");
    std::array<Complex, 4> amplitudes;
    for (int k = 0; k < 4; ++k) amplitudes[k] = complex_from_json(pump.at(k), "pump");
    try {
      cfg.pump = PumpConfig::normalized(amplitudes);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(std::string("config key 'pump': ") + err.what());
    }
  }

  if (config.contains("visibility")) {
    const json& vis = config["visibility"];
    if (vis.is_number()) {
      const double v = vis.get<double>();
      if (!(v >= 0.0 && v <= 1.0))
        throw ConfigError("config key 'visibility' must lie in [0,1]");
      cfg.source.visibility = Eigen::Matrix4d::Constant(v);
      cfg.source.visibility.diagonal().setOnes();
    } else if (vis.is_array() && vis.size() == 4) {
      for (int r = 0; r < 4; ++r) {
        const json& row = vis.at(r);
        if (!row.is_array() || row.size() != 4)
          throw ConfigError("config key 'visibility' must be a 4x4 matrix or a number");
        for (int c = 0; c < 4; ++c)
          cfg.source.visibility(r, c) = require_number(row.at(c), "visibility");
      }
    } else {
      throw ConfigError("config key 'visibility' must be a 4x4 matrix or a number");
    }
  }

  if (config.contains("efficiency")) {
    const json& eff = config["efficiency"];
    if (!eff.is_array() || eff.size() != 4)
      throw ConfigError("config key 'efficiency' must be an array of 4 numbers");
    for (int k = 0; k < 4; ++k)
      cfg.source.efficiency[k] = require_number(eff.at(k), "efficiency");
  }

  if (config.contains("intermodal_weight"))
    cfg.source.intermodal_pair_weight =
        require_number(config["intermodal_weight"], "intermodal_weight");

  try {
    cfg.source.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("source model: ") + err.what());
  }

  if (config.contains("noise_lambda")) {
    cfg.noise_lambda = require_number(config["noise_lambda"], "noise_lambda");
    if (!(cfg.noise_lambda >= 0.0 && cfg.noise_lambda <= 1.0))
      throw ConfigError("config key 'noise_lambda' must lie in [0,1]");
  }

  if (config.contains("shots")) {
    cfg.shots = require_integer(config["shots"], "shots");
    if (cfg.shots <= 0) throw ConfigError("config key 'shots' must be positive");
  }

  if (config.contains("seed")) {
    const long long seed = require_integer(config["seed"], "seed");
    if (seed < 0) throw ConfigError("config key 'seed' must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }

  if (config.contains("projectors"))
    cfg.projectors = require_string(config["projectors"], "projectors");

  if (config.contains("resamples")) {
    cfg.resamples = require_integer(config["resamples"], "resamples");
    if (cfg.resamples < 0) throw ConfigError("config key 'resamples' must be non-negative");
  }

  if (config.contains("p_grid")) {
    const json& grid = config["p_grid"];
    if (!grid.is_object()) throw ConfigError("config key 'p_grid' must be an object");
    static const std::set<std::string> grid_keys = {"start", "stop", "count"};
    for (const auto& item : grid.items())
      if (!grid_keys.count(item.key()))
        throw ConfigError("config key 'p_grid." + item.key() + "' is not recognized");
    if (grid.contains("start")) cfg.p_grid.start = require_number(grid["start"], "p_grid.start");
    if (grid.contains("stop")) cfg.p_grid.stop = require_number(grid["stop"], "p_grid.stop");
    if (grid.contains("count"))
      cfg.p_grid.count = static_cast<int>(require_integer(grid["count"], "p_grid.count"));
    if (!(cfg.p_grid.start >= 0.0 && cfg.p_grid.stop <= 1.0 &&
          cfg.p_grid.start <= cfg.p_grid.stop))
      throw ConfigError("config key 'p_grid' must satisfy 0 <= start <= stop <= 1");
    if (cfg.p_grid.count < 1 || (cfg.p_grid.count == 1 && cfg.p_grid.start != cfg.p_grid.stop))
      throw ConfigError("config key 'p_grid.count' must fit the interval");
  }

  if (config.contains("phase_points")) {
    cfg.phase_points = static_cast<int>(require_integer(config["phase_points"], "phase_points"));
    if (cfg.phase_points < 8)
      throw ConfigError("config key 'phase_points' must be at least 8");
  }

  if (config.contains("rhom_visibility")) {
    cfg.rhom_visibility = require_number(config["rhom_visibility"], "rhom_visibility");
    if (!(cfg.rhom_visibility >= 0.0 && cfg.rhom_visibility <= 1.0))
      throw ConfigError("config key 'rhom_visibility' must lie in [0,1]");
  }

  if (config.contains("flip_photon")) {
    const std::string photon = require_string(config["flip_photon"], "flip_photon");
    if (photon == "signal")
      cfg.flip_photon = Photon::signal;
    else if (photon == "idler")
      cfg.flip_photon = Photon::idler;
    else
      throw ConfigError("config key 'flip_photon' must be 'signal' or 'idler'");
  }

  if (config.contains("distill_method")) {
    cfg.distill_method = require_string(config["distill_method"], "distill_method");
    if (cfg.distill_method != "stabilizer" && cfg.distill_method != "mle")
      throw ConfigError("config key 'distill_method' must be 'stabilizer' or 'mle'");
  }

  if (config.contains("out")) cfg.out = require_string(config["out"], "out");

  return cfg;
}

std::uint64_t require_seed(const RunConfig& cfg, const std::string& command) {
  if (!cfg.seed)
    throw ConfigError("command '" + command +
                      "' draws random samples and needs an explicit seed "
                      "(--seed or config key 'seed')");
  return *cfg.seed;
}

DensityMatrix build_state(const RunConfig& cfg) {
  DensityMatrix rho =
      cfg.state == "chip"
          ? biphoton_state(cfg.pump ? *cfg.pump : PumpConfig::ghz(), cfg.source)
          : DensityMatrix::from_pure(state_by_name(cfg.state));
  if (cfg.noise_lambda < 1.0) rho = mix_with_white_noise(rho, cfg.noise_lambda);
  return rho;
}

StateVector ideal_target(const RunConfig& cfg) {
  return state_by_name(cfg.state == "chip" ? "hyper" : cfg.state);
}

std::vector<int> qubit_dims(const DensityMatrix& rho) {
  int n = 0;
  while ((1 << n) < rho.dim()) ++n;
  if ((1 << n) != rho.dim())
    throw std::runtime_error("state dimension is not a power of 2");
  return std::vector<int>(n, 2);
}

std::vector<MeasurementSetting> load_settings(const RunConfig& cfg, int n_qubits) {
  if (cfg.projectors == "complete" || cfg.projectors == "restricted" ||
      cfg.projectors == "restricted-xz") {
    try {
      return settings_by_name(cfg.projectors, n_qubits);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(std::string("config key 'projectors': ") + err.what());
    }
  }
  return read_projector_set_json(cfg.projectors);
}

std::vector<std::string> metadata_lines(std::uint64_t hash, const std::optional<std::uint64_t>& seed) {
  std::vector<std::string> lines;
  lines.push_back("config_hash=" + hex64(hash));
  lines.push_back("seed=" + (seed ? std::to_string(*seed) : std::string("none")));
  lines.push_back(std::string("version=") + kVersion);
  return lines;
}

json metadata_json(std::uint64_t hash, const std::optional<std::uint64_t>& seed) {
  json meta;
  meta["config_hash"] = hex64(hash);
  if (seed)
    meta["seed"] = *seed;
  else
    meta["seed"] = nullptr;
  meta["version"] = kVersion;
  return meta;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c)
      row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

void write_density_matrix_json(const std::filesystem::path& path, const DensityMatrix& rho,
                               const json& meta) {
  json root;
  root["meta"] = meta;
  root["dim"] = rho.dim();
  root["entries"] = matrix_json(rho.entries());
  write_text(path, root.dump(2) + "\n");
}

std::filesystem::path prepare_out_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  return dir;
}

// ---- commands ----

int run_simulate(const RunConfig& cfg, std::uint64_t hash) {
  const DensityMatrix rho = build_state(cfg);
  const auto dir = prepare_out_dir(cfg);
  write_density_matrix_json(dir / "state.json", rho, metadata_json(hash, cfg.seed));

  const double mean_entropy = mean_single_site_entropy(rho, qubit_dims(rho));
  double ideal_fidelity = 1.0;
  const StateVector target = ideal_target(cfg);
  if (target.dim() == rho.dim()) ideal_fidelity = fidelity_pure(rho, target);

  std::cout << "simulate state=" << cfg.state << " dim=" << rho.dim()
            << " purity=" << format_double(rho.purity())
            << " fidelity_vs_ideal=" << format_double(ideal_fidelity)
            << " mean_site_entropy=" << format_double(mean_entropy)
            << " out=" << (dir / "state.json").string() << "\n";
  return 0;
}

int run_tomo(const RunConfig& cfg, std::uint64_t hash) {
  const std::uint64_t seed = require_seed(cfg, "tomo");
  const DensityMatrix rho = build_state(cfg);
  const int n_qubits = static_cast<int>(qubit_dims(rho).size());
  const std::vector<MeasurementSetting> settings = load_settings(cfg, n_qubits);

  const std::vector<CountRecord> records = simulate_counts(rho, settings, cfg.shots, seed);
  const auto dir = prepare_out_dir(cfg);
  write_count_records_csv((dir / "counts.csv").string(), records,
                          metadata_lines(hash, cfg.seed));

  const MleReport report = mle_reconstruct_report(records, settings);
  write_density_matrix_json(dir / "rho_mle.json", report.rho, metadata_json(hash, cfg.seed));

  const int rank = measurement_rank(settings);
  const int gauge = rho.dim() * rho.dim() - rank;

  const std::vector<double> predicted = predicted_probabilities(report.rho, records, settings);
  const std::vector<double> observed = observed_frequencies(records);
  double max_dev = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    max_dev = std::max(max_dev, std::abs(predicted[i] - observed[i]));

  const StateVector target = ideal_target(cfg);
  const double fidelity = fidelity_pure(report.rho, target);

  std::string stderr_text = "n/a";
  if (cfg.resamples > 0) {
    try {
      const auto estimator = direct_fidelity_estimator(target, settings);
      const BootstrapResult boot =
          bootstrap_estimate(records, estimator, cfg.resamples, seed + 1);
      stderr_text = format_double(boot.standard_error);
    } catch (const std::invalid_argument&) {
      // The projector set cannot measure every fidelity term; report the
      // point estimate alone.
      stderr_text = "n/a";
    }
  }

  std::cout << "tomo state=" << cfg.state << " shots=" << cfg.shots
            << " settings=" << settings.size() << " rank=" << rank << " gauge=" << gauge
            << " mle_iterations=" << report.iterations
            << " converged=" << (report.converged ? "yes" : "no")
            << " fidelity=" << format_double(fidelity) << " fidelity_stderr=" << stderr_text
            << " max_freq_dev=" << format_double(max_dev)
            << " out=" << (dir / "rho_mle.json").string() << "\n";
  return 0;
}

int run_rhom(const RunConfig& cfg, std::uint64_t hash) {
  const int n = cfg.phase_points;
  std::vector<double> classical(n), coincidence(n);
  std::ostringstream csv;
  for (const std::string& line : metadata_lines(hash, cfg.seed)) csv << "# " << line << "\n";
  csv << "phi,classical,coincidence\n";
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n;
    classical[k] = classical_fringe(phi);
    coincidence[k] = rhom_fringe_noisy(phi, cfg.rhom_visibility);
    csv << format_double(phi) << ',' << format_double(classical[k]) << ','
        << format_double(coincidence[k]) << "\n";
  }

  const auto dir = prepare_out_dir(cfg);
  write_text(dir / "rhom.csv", csv.str());

  const double f_classical = fit_fringe_frequency(classical);
  const double f_coincidence = fit_fringe_frequency(coincidence);
  const double visibility = fringe_visibility(coincidence);

  std::cout << "rhom points=" << n << " freq_classical=" << format_double(f_classical)
            << " freq_coincidence=" << format_double(f_coincidence)
            << " ratio=" << format_double(f_coincidence / f_classical)
            << " visibility=" << format_double(visibility)
            << " out=" << (dir / "rhom.csv").string() << "\n";
  return 0;
}

int run_distill(const RunConfig& cfg, std::uint64_t hash) {
  const DensityMatrix resource = build_state(cfg);
  if (resource.dim() != 16)
    throw ConfigError("distillation needs a 16-dimensional two-photon state");

  std::vector<double> grid(cfg.p_grid.count);
  for (int i = 0; i < cfg.p_grid.count; ++i)
    grid[i] = cfg.p_grid.count == 1
                  ? cfg.p_grid.start
                  : cfg.p_grid.start +
                        (cfg.p_grid.stop - cfg.p_grid.start) * i / (cfg.p_grid.count - 1);

  std::vector<double> f_no(grid.size()), f_yes(grid.size()), success(grid.size(), 1.0);
  long long non_dominant = 0;
  if (cfg.distill_method == "stabilizer") {
    const auto no = distill_sweep(resource, grid, false, cfg.flip_photon);
    const auto yes = distill_sweep(resource, grid, true, cfg.flip_photon);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      f_no[i] = no[i].fidelity;
      f_yes[i] = yes[i].fidelity;
      success[i] = yes[i].success_probability;
    }
  } else {
    const std::uint64_t seed = require_seed(cfg, "distill");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto no = distill_point_mle(resource, grid[i], false, cfg.shots,
                                        seed + 2 * i, cfg.flip_photon);
      const auto yes = distill_point_mle(resource, grid[i], true, cfg.shots,
                                         seed + 2 * i + 1, cfg.flip_photon);
      f_no[i] = no.fidelity;
      f_yes[i] = yes.fidelity;
      success[i] = yes.success_probability;
      if (!yes.target_dominant || !no.target_dominant) ++non_dominant;
    }
  }

  std::ostringstream csv;
  for (const std::string& line : metadata_lines(hash, cfg.seed)) csv << "# " << line << "\n";
  csv << "p,fidelity_no_distill,fidelity_distill,success_probability\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    csv << format_double(grid[i]) << ',' << format_double(f_no[i]) << ','
        << format_double(f_yes[i]) << ',' << format_double(success[i]) << "\n";

  const auto dir = prepare_out_dir(cfg);
  write_text(dir / "distill.csv", csv.str());

  double gain = 0.0;
  int gain_points = 0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i] <= 0.5 + 1e-12) {
      gain += f_yes[i] - f_no[i];
      ++gain_points;
    }
  if (gain_points > 0) gain /= gain_points;

  std::cout << "distill method=" << cfg.distill_method << " points=" << grid.size()
            << " mean_gain_upto_half=" << format_double(gain);
  if (cfg.distill_method == "mle")
    std::cout << " non_dominant_points=" << non_dominant;
  std::cout << " out=" << (dir / "distill.csv").string() << "\n";
  return 0;
}

int run_entropy(const RunConfig& cfg, std::uint64_t hash) {
  const DensityMatrix rho = build_state(cfg);
  const std::vector<int> dims = qubit_dims(rho);

  json result;
  result["meta"] = metadata_json(hash, cfg.seed);
  result["state"] = cfg.state;
  const double mean_entropy = mean_single_site_entropy(rho, dims);
  result["mean_single_site"] = mean_entropy;

  std::ostringstream extra;
  if (rho.dim() == 16) {
    // Signal photon carries subsystems 0 (mode) and 2 (path).
    const double photon = entanglement_entropy(rho, dims, {0, 2}, 4.0);
    const double dof = entanglement_entropy(rho, dims, {0, 1}, 4.0);
    result["photon_bipartition"] = photon;
    result["dof_bipartition"] = dof;
    extra << " photon_bipartition=" << format_double(photon)
          << " dof_bipartition=" << format_double(dof);
  }

  const auto dir = prepare_out_dir(cfg);
  write_text(dir / "entropy.json", result.dump(2) + "\n");

  std::cout << "entropy state=" << cfg.state
            << " mean_single_site=" << format_double(mean_entropy) << extra.str()
            << " out=" << (dir / "entropy.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, const char* const* argv) {
  CLI::App app{"simulator and analysis toolkit for a hybrid path/transverse-mode photonic chip"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::int64_t> seed_flag;
  std::optional<std::string> out_flag;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "build the configured state and write it as JSON"},
      {"tomo", "simulate counts and reconstruct the state by maximum likelihood"},
      {"rhom", "tabulate interference fringes and fit their frequencies"},
      {"distill", "sweep the bit-flip rate with and without distillation"},
      {"entropy", "report entanglement entropies of the configured state"},
  };
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--set", overrides, "override a config key, KEY=VALUE (dotted keys descend)")
        ->type_size(1);
    sub->add_option("--seed", seed_flag, "random seed (overrides the config)");
    sub->add_option("--out", out_flag, "output directory (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();

  try {
    json config = config_path.empty() ? json::object() : load_config_file(config_path);
    for (const std::string& assignment : overrides) apply_override(config, assignment);
    if (seed_flag) {
      if (*seed_flag < 0) throw ConfigError("--seed must be non-negative");
      config["seed"] = *seed_flag;
    }
    if (out_flag) config["out"] = *out_flag;

    const RunConfig cfg = extract_config(config, command);
    const std::uint64_t hash = fnv1a(config.dump());

    if (command == "simulate") return run_simulate(cfg, hash);
    if (command == "tomo") return run_tomo(cfg, hash);
    if (command == "rhom") return run_rhom(cfg, hash);
    if (command == "distill") return run_distill(cfg, hash);
    if (command == "entropy") return run_entropy(cfg, hash);
    throw std::runtime_error("unhandled command '" + command + "'");
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  }
}

}  // namespace hyqsim::cli
