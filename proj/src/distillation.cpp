#include "hyqsim/distillation.hpp"

#include <cmath>
#include <stdexcept>

namespace hyqsim {

namespace {

// Basis bit layout, most significant first: mode_signal, mode_idler,
// path_signal, path_idler.
constexpr int kModeSignalBit = 3;
constexpr int kModeIdlerBit = 2;

int cnot_image(int basis) {
  const int path_signal = (basis >> 1) & 1;
  const int path_idler = basis & 1;
  return basis ^ (path_signal << kModeSignalBit) ^ (path_idler << kModeIdlerBit);
}

bool modes_correlated(int basis) {
  return ((basis >> kModeSignalBit) & 1) == ((basis >> kModeIdlerBit) & 1);
}

// Parity of the path outcome digits of a 16-outcome stabilizer setting
// (outcome digits follow the qubit order, so path digits are the low two).
double path_sign(int outcome) {
  return (((outcome >> 1) ^ outcome) & 1) ? -1.0 : 1.0;
}

bool outcome_modes_correlated(int outcome) {
  // Mode digits are the high two of the 4-digit outcome index; in the Z
  // basis digit 1 means state |1>.
  return ((outcome >> 3) & 1) == ((outcome >> 2) & 1);
}

}  // namespace

Matrix local_cnot() {
  Matrix u = Matrix::Zero(16, 16);
  for (int b = 0; b < 16; ++b) u(cnot_image(b), b) = 1.0;
  return u;
}

DensityMatrix apply_local_cnot(const DensityMatrix& rho) {
  if (rho.dim() != 16)
    throw std::invalid_argument("the transversal CNOT acts on the 16-dimensional state");
  const Matrix u = local_cnot();
  return DensityMatrix(u * rho.entries() * u.adjoint());
}

std::array<FlipScenario, 4> all_flip_scenarios() {
  return {FlipScenario{false, false}, FlipScenario{true, false},
          FlipScenario{false, true}, FlipScenario{true, true}};
}

FlipWeights flip_weights(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("flip rate must lie in [0,1]");
  return {(1.0 - p) * (1.0 - p), p * (1.0 - p), p * p};
}

DensityMatrix scenario_state(const DensityMatrix& resource, const FlipScenario& scenario,
                             Photon flipped_photon) {
  DensityMatrix state = resource;
  if (scenario.path_flip) state = apply_bit_flip(state, {flipped_photon, Dof::path});
  if (scenario.mode_flip) state = apply_bit_flip(state, {flipped_photon, Dof::mode});
  return state;
}

ScenarioCounts scenario_counts(const DensityMatrix& resource, Photon flipped_photon,
                               bool with_cnot) {
  if (resource.dim() != 16)
    throw std::invalid_argument("scenario counts require the 16-dimensional state");

  ScenarioCounts out;
  out.setting_labels = {"XX", "YY", "ZZ"};
  std::vector<MeasurementSetting> settings;
  for (const std::string& stabilizer : out.setting_labels)
    settings.push_back(pauli_setting("ZZ" + stabilizer));

  const auto scenarios = all_flip_scenarios();
  for (std::size_t c = 0; c < scenarios.size(); ++c) {
    DensityMatrix state = scenario_state(resource, scenarios[c], flipped_photon);
    if (with_cnot) state = apply_local_cnot(state);
    out.counts[c].reserve(settings.size());
    for (const MeasurementSetting& setting : settings) {
      Eigen::VectorXd distribution(16);
      for (int o = 0; o < 16; ++o)
        distribution(o) = born_probability(state, setting.outcomes[o]);
      out.counts[c].push_back(std::move(distribution));
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> scale_counts(const ScenarioCounts& scenarios, double p) {
  const FlipWeights w = flip_weights(p);
  const std::size_t n_settings = scenarios.setting_labels.size();
  for (const auto& per_setting : scenarios.counts)
    if (per_setting.size() != n_settings)
      throw std::invalid_argument("scenario counts are missing settings");

  const std::array<double, 4> weight{w.none, w.one, w.one, w.both};
  std::vector<Eigen::VectorXd> combined;
  combined.reserve(n_settings);
  for (std::size_t s = 0; s < n_settings; ++s) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(scenarios.counts[0][s].size());
    for (std::size_t c = 0; c < 4; ++c) {
      const Eigen::VectorXd& dist = scenarios.counts[c][s];
      if (dist.minCoeff() < -1e-12 || std::abs(dist.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("scenario distributions must be normalized");
      acc += weight[c] * dist;
    }
    combined.push_back(std::move(acc));
  }
  return combined;
}

double stabilizer_fidelity(double xx, double yy, double zz) {
  for (double e : {xx, yy, zz})
    if (!(e >= -1.0 - 1e-9 && e <= 1.0 + 1e-9))
      throw std::invalid_argument("stabilizer expectations must lie in [-1,1]");
  const double f = 0.25 * (1.0 + xx - yy + zz);
  return std::clamp(f, 0.0, 1.0);
}

double mode_postselection_probability(const DensityMatrix& rho, bool correlated) {
  if (rho.dim() != 16)
    throw std::invalid_argument("mode post-selection requires the 16-dimensional state");
  double probability = 0.0;
  for (int b = 0; b < 16; ++b)
    if (modes_correlated(b) == correlated) probability += rho.entries()(b, b).real();
  return std::clamp(probability, 0.0, 1.0);
}

Postselection postselect_mode_correlated(const DensityMatrix& rho) {
  if (rho.dim() != 16)
    throw std::invalid_argument("mode post-selection requires the 16-dimensional state");
  const double success = mode_postselection_probability(rho, true);
  if (success < 1e-12)
    throw std::runtime_error("mode post-selection succeeds with vanishing probability");

  // Keep the mode-correlated block and trace out the modes.
  Matrix path = Matrix::Zero(4, 4);
  for (int m = 0; m < 4; m += 3)  // mode configurations 00 and 11
    for (int pr = 0; pr < 4; ++pr)
      for (int pc = 0; pc < 4; ++pc)
        path(pr, pc) += rho.entries()((m << 2) | pr, (m << 2) | pc);
  path /= success;
  return {DensityMatrix::projected(path), success};
}

std::vector<SweepPoint> distill_sweep(const DensityMatrix& resource,
                                      const std::vector<double>& p_grid,
                                      bool with_distillation, Photon flipped_photon) {
  const ScenarioCounts scenarios = scenario_counts(resource, flipped_photon, with_distillation);

  std::vector<SweepPoint> sweep;
  sweep.reserve(p_grid.size());
  for (double p : p_grid) {
    const std::vector<Eigen::VectorXd> combined = scale_counts(scenarios, p);
    double expectations[3];
    double success = 1.0;
    for (std::size_t s = 0; s < combined.size(); ++s) {
      const Eigen::VectorXd& dist = combined[s];
      double kept = 0.0, signed_sum = 0.0;
      for (int o = 0; o < dist.size(); ++o) {
        if (with_distillation && !outcome_modes_correlated(o)) continue;
        kept += dist(o);
        signed_sum += path_sign(o) * dist(o);
      }
      if (!(kept > 1e-12))
        throw std::runtime_error("post-selection keeps no counts");
      expectations[s] = signed_sum / kept;
      if (s == 0) success = with_distillation ? kept : 1.0;
    }
    sweep.push_back({p, stabilizer_fidelity(expectations[0], expectations[1], expectations[2]),
                     success});
  }
  return sweep;
}

MleSweepPoint distill_point_mle(const DensityMatrix& resource, double p,
                                bool with_distillation, long long shots,
                                std::uint64_t seed, Photon flipped_photon) {
  const FlipWeights w = flip_weights(p);
  const std::array<double, 4> weight{w.none, w.one, w.one, w.both};
  const auto scenarios = all_flip_scenarios();

  // Error-averaged state, optionally distilled and post-selected.
  Matrix mixed = Matrix::Zero(16, 16);
  for (std::size_t c = 0; c < scenarios.size(); ++c) {
    DensityMatrix state = scenario_state(resource, scenarios[c], flipped_photon);
    if (with_distillation) state = apply_local_cnot(state);
    mixed += weight[c] * state.entries();
  }
  const DensityMatrix averaged = DensityMatrix::projected(mixed);

  MleSweepPoint point;
  point.p = p;
  DensityMatrix path_state = DensityMatrix::maximally_mixed(4);
  if (with_distillation) {
    const Postselection selected = postselect_mode_correlated(averaged);
    path_state = selected.path_state;
    point.success_probability = selected.success_probability;
  } else {
    path_state = partial_trace(averaged, {2, 2, 2, 2}, {2, 3});
  }

  const auto settings = complete_pauli_settings(2);
  const auto records = simulate_counts(path_state, settings, shots, seed);
  const MleReport report = mle_reconstruct_report(records, settings);
  point.fidelity = fidelity_pure(report.rho, bell_state(BellKind::phi_plus));
  point.converged = report.converged;
  point.target_dominant = point.fidelity > 0.5;
  return point;
}

}  // namespace hyqsim
