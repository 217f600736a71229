#include "hyqsim/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hyqsim {

namespace {

constexpr double kSettingSumTol = 1e-9;
constexpr double kProbabilityFloor = 1e-14;

int checked_dim(const std::vector<MeasurementSetting>& settings) {
  if (settings.empty()) throw std::invalid_argument("no measurement settings");
  return settings.front().outcomes.front().dim();
}

}  // namespace

void validate_setting(const MeasurementSetting& setting) {
  if (setting.id.empty()) throw std::invalid_argument("measurement setting needs an id");
  if (setting.outcomes.empty())
    throw std::invalid_argument("measurement setting '" + setting.id + "' has no outcomes");
  const int dim = setting.outcomes.front().dim();
  Matrix sum = Matrix::Zero(dim, dim);
  for (const Projector& p : setting.outcomes) {
    if (p.dim() != dim)
      throw std::invalid_argument("outcome dimensions differ in setting '" + setting.id + "'");
    sum += p.entries();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sum, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().maxCoeff() > 1.0 + kSettingSumTol)
    throw std::invalid_argument("outcomes of setting '" + setting.id +
                                "' sum beyond the identity");
}

void validate_settings(const std::vector<MeasurementSetting>& settings) {
  if (settings.empty()) throw std::invalid_argument("no measurement settings");
  const int dim = checked_dim(settings);
  std::map<std::string, int> seen;
  for (const MeasurementSetting& s : settings) {
    validate_setting(s);
    if (s.outcomes.front().dim() != dim)
      throw std::invalid_argument("settings mix state dimensions");
    if (++seen[s.id] > 1)
      throw std::invalid_argument("duplicate setting id '" + s.id + "'");
  }
}

StateVector pauli_eigenstate(char basis, int which) {
  if (which != 0 && which != 1)
    throw std::invalid_argument("eigenstate selector must be 0 or 1");
  const double r = 1.0 / std::sqrt(2.0);
  const Complex i(0.0, 1.0);
  Vector v(2);
  switch (basis) {
    case 'X': v << r, (which == 0 ? r : -r); break;
    case 'Y': v << r, (which == 0 ? i * r : -i * r); break;
    case 'Z': v = Vector::Zero(2); v(which) = 1.0; break;
    default:
      throw std::invalid_argument(std::string("unknown Pauli basis '") + basis + "'");
  }
  return StateVector(std::move(v));
}

MeasurementSetting pauli_setting(const std::string& label) {
  if (label.empty()) throw std::invalid_argument("Pauli basis label must be non-empty");
  const int n = static_cast<int>(label.size());
  MeasurementSetting setting;
  setting.id = label;
  setting.basis = label;
  const int n_outcomes = 1 << n;
  setting.outcomes.reserve(n_outcomes);
  for (int outcome = 0; outcome < n_outcomes; ++outcome) {
    StateVector v = pauli_eigenstate(label[0], (outcome >> (n - 1)) & 1);
    for (int q = 1; q < n; ++q)
      v = tensor(v, pauli_eigenstate(label[q], (outcome >> (n - 1 - q)) & 1));
    setting.outcomes.push_back(Projector::onto(v));
  }
  return setting;
}

std::vector<MeasurementSetting> product_settings(
    const std::vector<std::string>& axes_per_qubit) {
  if (axes_per_qubit.empty()) throw std::invalid_argument("no qubits specified");
  for (const std::string& axes : axes_per_qubit)
    if (axes.empty()) throw std::invalid_argument("every qubit needs at least one axis");

  std::vector<MeasurementSetting> settings;
  std::vector<std::size_t> choice(axes_per_qubit.size(), 0);
  while (true) {
    std::string label;
    for (std::size_t q = 0; q < choice.size(); ++q) label += axes_per_qubit[q][choice[q]];
    settings.push_back(pauli_setting(label));
    int q = static_cast<int>(choice.size()) - 1;
    while (q >= 0 && ++choice[q] == axes_per_qubit[q].size()) choice[q--] = 0;
    if (q < 0) break;
  }
  return settings;
}

std::vector<MeasurementSetting> complete_pauli_settings(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 8)
    throw std::invalid_argument("qubit count out of supported range");
  return product_settings(std::vector<std::string>(n_qubits, "XYZ"));
}

std::vector<MeasurementSetting> restricted_settings_no_mode_y() {
  return product_settings({"XZ", "XZ", "XYZ", "XYZ"});
}

std::vector<MeasurementSetting> restricted_settings_xz_only() {
  return product_settings({"XZ", "XZ", "XZ", "XZ"});
}

std::vector<MeasurementSetting> settings_by_name(const std::string& name, int n_qubits) {
  if (name == "complete") return complete_pauli_settings(n_qubits);
  if (name == "restricted") {
    if (n_qubits != 4)
      throw std::invalid_argument("the restricted set is defined on 4 qubits");
    return restricted_settings_no_mode_y();
  }
  if (name == "restricted-xz") {
    if (n_qubits != 4)
      throw std::invalid_argument("the restricted set is defined on 4 qubits");
    return restricted_settings_xz_only();
  }
  throw std::invalid_argument("unknown projector set '" + name + "'");
}

std::vector<CountRecord> simulate_counts(const DensityMatrix& rho,
                                         const std::vector<MeasurementSetting>& settings,
                                         long long shots, std::uint64_t seed) {
  validate_settings(settings);
  if (rho.dim() != checked_dim(settings))
    throw std::invalid_argument("state dimension does not match the settings");
  if (shots <= 0) throw std::invalid_argument("shots must be positive");

  std::mt19937_64 rng(seed);
  std::vector<CountRecord> records;
  for (const MeasurementSetting& setting : settings) {
    const std::size_t first = records.size();
    long long total = 0;
    for (std::size_t o = 0; o < setting.outcomes.size(); ++o) {
      const double mean = static_cast<double>(shots) * born_probability(rho, setting.outcomes[o]);
      long long counts = 0;
      if (mean > 0.0) {
        std::poisson_distribution<long long> draw(mean);
        counts = draw(rng);
      }
      total += counts;
      records.push_back({setting.id, static_cast<int>(o), counts, 0});
    }
    const long long realized = std::max<long long>(total, 1);
    for (std::size_t r = first; r < records.size(); ++r) records[r].shots = realized;
  }
  return records;
}

std::vector<CountRecord> exact_counts(const DensityMatrix& rho,
                                      const std::vector<MeasurementSetting>& settings,
                                      long long shots) {
  validate_settings(settings);
  if (rho.dim() != checked_dim(settings))
    throw std::invalid_argument("state dimension does not match the settings");
  if (shots <= 0) throw std::invalid_argument("shots must be positive");

  std::vector<CountRecord> records;
  for (const MeasurementSetting& setting : settings) {
    const std::size_t first = records.size();
    long long total = 0;
    for (std::size_t o = 0; o < setting.outcomes.size(); ++o) {
      const long long counts =
          std::llround(static_cast<double>(shots) * born_probability(rho, setting.outcomes[o]));
      total += counts;
      records.push_back({setting.id, static_cast<int>(o), counts, 0});
    }
    const long long realized = std::max<long long>(total, 1);
    for (std::size_t r = first; r < records.size(); ++r) records[r].shots = realized;
  }
  return records;
}

namespace {

struct OutcomeData {
  const Matrix* projector;
  double frequency;  // per-setting frequency / number of settings with data
};

// Collapses records onto settings, returning only outcomes with positive
// counts; frequencies are normalized so they sum to 1 overall.
std::vector<OutcomeData> collect_outcomes(const std::vector<CountRecord>& records,
                                          const std::vector<MeasurementSetting>& settings) {
  validate_settings(settings);
  if (records.empty()) throw std::invalid_argument("no count records");

  std::map<std::string, const MeasurementSetting*> by_id;
  for (const MeasurementSetting& s : settings) by_id[s.id] = &s;

  // Aggregate duplicate (setting, outcome) rows.
  std::map<std::pair<std::string, int>, long long> counts;
  for (const CountRecord& rec : records) {
    const auto it = by_id.find(rec.setting_id);
    if (it == by_id.end())
      throw std::invalid_argument("record references unknown setting '" + rec.setting_id + "'");
    if (rec.outcome_index < 0 ||
        rec.outcome_index >= static_cast<int>(it->second->outcomes.size()))
      throw std::invalid_argument("record outcome index out of range in setting '" +
                                  rec.setting_id + "'");
    if (rec.counts < 0) throw std::invalid_argument("negative counts");
    counts[{rec.setting_id, rec.outcome_index}] += rec.counts;
  }

  std::map<std::string, long long> setting_totals;
  for (const auto& [key, c] : counts) setting_totals[key.first] += c;
  long long settings_with_data = 0;
  for (const auto& [id, total] : setting_totals)
    if (total > 0) ++settings_with_data;
  if (settings_with_data == 0) throw std::invalid_argument("all records have zero counts");

  std::vector<OutcomeData> outcomes;
  for (const auto& [key, c] : counts) {
    if (c == 0) continue;
    const MeasurementSetting* setting = by_id[key.first];
    const double f = static_cast<double>(c) /
                     static_cast<double>(setting_totals[key.first]) /
                     static_cast<double>(settings_with_data);
    outcomes.push_back({&setting->outcomes[key.second].entries(), f});
  }
  return outcomes;
}

double log_likelihood(const std::vector<OutcomeData>& outcomes,
                      const std::vector<double>& probabilities) {
  double ll = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    ll += outcomes[i].frequency * std::log(probabilities[i]);
  return ll;
}

}  // namespace

MleReport mle_reconstruct_report(const std::vector<CountRecord>& records,
                                 const std::vector<MeasurementSetting>& settings,
                                 const MleOptions& options) {
  if (options.max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
  if (!(options.convergence_threshold > 0.0))
    throw std::invalid_argument("convergence threshold must be positive");

  const std::vector<OutcomeData> outcomes = collect_outcomes(records, settings);
  const int dim = checked_dim(settings);
  const Matrix identity = Matrix::Identity(dim, dim);

  Matrix rho = identity / static_cast<double>(dim);
  long long floor_hits = 0;

  auto probabilities = [&](const Matrix& state, std::vector<double>& out) {
    out.resize(outcomes.size());
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      double p = (outcomes[i].projector->conjugate().cwiseProduct(state)).sum().real();
      if (p < kProbabilityFloor) {
        p = kProbabilityFloor;
        ++floor_hits;
      }
      out[i] = p;
    }
  };

  std::vector<double> probs;
  probabilities(rho, probs);
  double ll = log_likelihood(outcomes, probs);

  std::vector<double> likelihood_trace;
  if (options.track_likelihood) likelihood_trace.push_back(ll);

  bool converged = false;
  long long iteration = 0;
  std::vector<double> candidate_probs;
  for (; iteration < options.max_iterations; ++iteration) {
    Matrix r_op = Matrix::Zero(dim, dim);
    for (std::size_t i = 0; i < outcomes.size(); ++i)
      r_op += (outcomes[i].frequency / probs[i]) * (*outcomes[i].projector);

    // Full step first; dilute towards the identity until the likelihood is
    // non-decreasing. A stall below the minimal step weight means the fixed
    // point is reached to machine precision.
    double alpha = 1.0;
    Matrix candidate;
    double candidate_ll = 0.0;
    bool accepted = false;
    while (alpha >= 1.0 / 1024.0) {
      const Matrix step = (1.0 - alpha) * identity + alpha * r_op;
      candidate = step * rho * step;
      candidate /= candidate.trace().real();
      candidate = 0.5 * (candidate + candidate.adjoint());
      probabilities(candidate, candidate_probs);
      candidate_ll = log_likelihood(outcomes, candidate_probs);
      if (candidate_ll >= ll) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      converged = true;
      break;
    }

    const double delta = candidate_ll - ll;
    rho = std::move(candidate);
    probs = candidate_probs;
    ll = candidate_ll;
    if (options.track_likelihood) likelihood_trace.push_back(ll);
    if (delta < options.convergence_threshold) {
      ++iteration;
      converged = true;
      break;
    }
  }

  return MleReport{DensityMatrix::projected(rho), iteration,   ll,
                   converged,                     floor_hits, std::move(likelihood_trace)};
}

DensityMatrix mle_reconstruct(const std::vector<CountRecord>& records,
                              const std::vector<MeasurementSetting>& settings,
                              const MleOptions& options) {
  return mle_reconstruct_report(records, settings, options).rho;
}

int measurement_rank(const std::vector<MeasurementSetting>& settings) {
  validate_settings(settings);
  const int dim = checked_dim(settings);
  const int d2 = dim * dim;

  // The rank of the stacked vectorized projectors equals the rank of their
  // operator-space Gram matrix sum_i vec(Pi_i) vec(Pi_i)^dag, which stays
  // d^2 x d^2 however many outcomes there are.
  int n = 0;
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(d2, d2);
  for (const MeasurementSetting& s : settings)
    for (const Projector& p : s.outcomes) {
      Eigen::Map<const Vector> v(p.entries().data(), d2);
      gram.selfadjointView<Eigen::Lower>().rankUpdate(v);
      ++n;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram, Eigen::EigenvaluesOnly);
  const double lambda_max = solver.eigenvalues().maxCoeff();
  if (!(lambda_max > 0.0)) return 0;
  // Rounding noise in the accumulated Gram matrix is additive at scale
  // epsilon * lambda_max, so the rank cut must sit above that floor rather
  // than at the squared singular-value tolerance.
  const double tol =
      std::max(n, d2) * std::numeric_limits<double>::epsilon() * lambda_max;
  int rank = 0;
  for (int i = 0; i < d2; ++i)
    if (solver.eigenvalues()(i) > tol) ++rank;
  return rank;
}

int reconstruction_gauge_dimension(const std::vector<MeasurementSetting>& settings) {
  const int dim = checked_dim(settings);
  return dim * dim - measurement_rank(settings);
}

std::vector<double> predicted_probabilities(const DensityMatrix& rho,
                                            const std::vector<CountRecord>& records,
                                            const std::vector<MeasurementSetting>& settings) {
  validate_settings(settings);
  std::map<std::string, const MeasurementSetting*> by_id;
  for (const MeasurementSetting& s : settings) by_id[s.id] = &s;
  std::vector<double> out;
  out.reserve(records.size());
  for (const CountRecord& rec : records) {
    const auto it = by_id.find(rec.setting_id);
    if (it == by_id.end())
      throw std::invalid_argument("record references unknown setting '" + rec.setting_id + "'");
    if (rec.outcome_index < 0 ||
        rec.outcome_index >= static_cast<int>(it->second->outcomes.size()))
      throw std::invalid_argument("record outcome index out of range");
    out.push_back(born_probability(rho, it->second->outcomes[rec.outcome_index]));
  }
  return out;
}

std::vector<double> observed_frequencies(const std::vector<CountRecord>& records) {
  std::map<std::string, long long> totals;
  for (const CountRecord& rec : records) {
    if (rec.counts < 0) throw std::invalid_argument("negative counts");
    totals[rec.setting_id] += rec.counts;
  }
  std::vector<double> out;
  out.reserve(records.size());
  for (const CountRecord& rec : records) {
    const long long total = totals[rec.setting_id];
    if (total <= 0)
      throw std::invalid_argument("setting '" + rec.setting_id + "' has no counts");
    out.push_back(static_cast<double>(rec.counts) / static_cast<double>(total));
  }
  return out;
}

namespace {

struct DiagonalizedObservable {
  std::string setting_id;
  std::vector<double> signs;  // +-1 per outcome
};

// Finds a setting where every outcome lies in a +-1 eigenspace of the
// observable: O Pi = s Pi with |s| = 1.
DiagonalizedObservable find_diagonalizing_setting(
    const std::vector<MeasurementSetting>& settings, const ObservableOperator& observable) {
  for (const MeasurementSetting& s : settings) {
    std::vector<double> signs;
    bool ok = true;
    for (const Projector& p : s.outcomes) {
      const Matrix product = observable.entries() * p.entries();
      const double trace_p = p.entries().trace().real();
      if (!(trace_p > 1e-12)) { ok = false; break; }
      const double sign = product.trace().real() / trace_p;
      if (std::abs(std::abs(sign) - 1.0) > 1e-8 ||
          (product - sign * p.entries()).cwiseAbs().maxCoeff() > 1e-8) {
        ok = false;
        break;
      }
      signs.push_back(sign >= 0.0 ? 1.0 : -1.0);
    }
    if (ok) return {s.id, std::move(signs)};
  }
  throw std::invalid_argument("no provided setting diagonalizes the observable");
}

double expectation_from_diagonalized(const std::vector<CountRecord>& records,
                                     const DiagonalizedObservable& diag) {
  double weighted = 0.0;
  long long total = 0;
  for (const CountRecord& rec : records) {
    if (rec.setting_id != diag.setting_id) continue;
    if (rec.outcome_index < 0 ||
        rec.outcome_index >= static_cast<int>(diag.signs.size()))
      throw std::invalid_argument("record outcome index out of range");
    weighted += diag.signs[rec.outcome_index] * static_cast<double>(rec.counts);
    total += rec.counts;
  }
  if (total <= 0)
    throw std::runtime_error("no counts recorded for setting '" + diag.setting_id + "'");
  return weighted / static_cast<double>(total);
}

}  // namespace

double expectation_from_counts(const std::vector<CountRecord>& records,
                               const std::vector<MeasurementSetting>& settings,
                               const ObservableOperator& observable) {
  validate_settings(settings);
  if (observable.dim() != checked_dim(settings))
    throw std::invalid_argument("observable dimension does not match the settings");
  return expectation_from_diagonalized(records,
                                       find_diagonalizing_setting(settings, observable));
}

std::function<double(const std::vector<CountRecord>&)> direct_fidelity_estimator(
    const StateVector& target, const std::vector<MeasurementSetting>& settings) {
  validate_settings(settings);
  const int dim = target.dim();
  if (dim != checked_dim(settings))
    throw std::invalid_argument("target dimension does not match the settings");
  int n = 0;
  while ((1 << n) < dim) ++n;
  if ((1 << n) != dim)
    throw std::invalid_argument("direct fidelity estimation needs a qubit register");

  const DensityMatrix target_rho = DensityMatrix::from_pure(target);

  // |t><t| = sum_P c_P P over Pauli strings P with c_P = <t|P|t> / 2^n.
  // Every non-identity term is resolved to its diagonalizing setting once,
  // up front, so the estimator itself only tallies counts.
  struct Term {
    double coefficient;
    DiagonalizedObservable readout;
  };
  std::vector<Term> terms;
  double identity_coefficient = 0.0;
  std::vector<int> digits(n, 0);
  const char axes[4] = {'I', 'X', 'Y', 'Z'};
  while (true) {
    std::string label;
    for (int q = 0; q < n; ++q) label += axes[digits[q]];
    const ObservableOperator p = pauli_string(label);
    const double c = expectation_value(target_rho, p) / static_cast<double>(dim);
    if (std::abs(c) > 1e-12) {
      if (label == std::string(static_cast<std::size_t>(n), 'I'))
        identity_coefficient = c;
      else
        terms.push_back({c, find_diagonalizing_setting(settings, p)});
    }
    int q = n - 1;
    while (q >= 0 && ++digits[q] == 4) digits[q--] = 0;
    if (q < 0) break;
  }

  return [terms, identity_coefficient](const std::vector<CountRecord>& records) {
    double fidelity = identity_coefficient;
    for (const Term& term : terms)
      fidelity += term.coefficient * expectation_from_diagonalized(records, term.readout);
    return fidelity;
  };
}

BootstrapResult bootstrap_estimate(
    const std::vector<CountRecord>& records,
    const std::function<double(const std::vector<CountRecord>&)>& estimator,
    long long n_resamples, std::uint64_t seed) {
  if (records.empty()) throw std::invalid_argument("no count records");
  if (n_resamples < 1) throw std::invalid_argument("resample count must be positive");
  if (!estimator) throw std::invalid_argument("estimator must be callable");

  std::vector<double> estimates;
  std::vector<double> sd_history;
  long long failures = 0;

  // Running mean and second central moment.
  double mean = 0.0, m2 = 0.0;

  std::vector<CountRecord> resampled = records;
  for (long long r = 0; r < n_resamples; ++r) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r));
    std::map<std::string, long long> totals;
    for (std::size_t i = 0; i < records.size(); ++i) {
      long long counts = 0;
      if (records[i].counts > 0) {
        std::poisson_distribution<long long> draw(static_cast<double>(records[i].counts));
        counts = draw(rng);
      }
      resampled[i].counts = counts;
      totals[records[i].setting_id] += counts;
    }
    for (std::size_t i = 0; i < records.size(); ++i)
      resampled[i].shots = std::max<long long>(totals[records[i].setting_id], 1);

    double estimate;
    try {
      estimate = estimator(resampled);
    } catch (const std::exception&) {
      ++failures;
      continue;
    }

    estimates.push_back(estimate);
    const double n = static_cast<double>(estimates.size());
    const double delta = estimate - mean;
    mean += delta / n;
    m2 += delta * (estimate - mean);
    sd_history.push_back(n > 1 ? std::sqrt(m2 / (n - 1.0)) : 0.0);

    // Early stop once the running standard deviation has been stable across
    // the whole trailing 10% of resamples: every value in the window must
    // agree with the current one within 1%. A single close pair is not
    // enough; early in the run the running estimate still fluctuates far
    // more than 1% and a one-point comparison would stop on chance dips.
    const std::size_t used = estimates.size();
    if (used >= 20) {
      const std::size_t window = std::max<std::size_t>(1, used / 10);
      const double now = sd_history[used - 1];
      bool stable = true;
      for (std::size_t i = 1; i <= window && stable; ++i) {
        const double then = sd_history[used - 1 - i];
        if (now == 0.0 && then == 0.0) continue;
        stable = then > 0.0 && std::abs(now - then) < 0.01 * then;
      }
      if (stable) break;
    }
  }

  const long long attempted = static_cast<long long>(estimates.size()) + failures;
  if (failures * 2 > attempted)
    throw std::runtime_error("bootstrap estimator failed on most resamples");
  if (estimates.empty()) throw std::runtime_error("bootstrap produced no estimates");

  BootstrapResult result;
  result.mean = mean;
  result.resamples_used = static_cast<long long>(estimates.size());
  result.estimator_failures = failures;
  const double n = static_cast<double>(estimates.size());
  result.standard_error = n > 1 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
  return result;
}

void write_count_records_csv(const std::string& path,
                             const std::vector<CountRecord>& records,
                             const std::vector<std::string>& metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (const std::string& line : metadata) out << "# " << line << '\n';
  out << "setting_id,outcome_index,counts,shots\n";
  for (const CountRecord& rec : records)
    out << rec.setting_id << ',' << rec.outcome_index << ',' << rec.counts << ','
        << rec.shots << '\n';
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::vector<CountRecord> read_count_records_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  int line_no = 0;
  // Metadata lines precede the header.
  do {
    if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' has no header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  } while (!line.empty() && line.front() == '#');
  if (line != "setting_id,outcome_index,counts,shots")
    throw std::runtime_error("'" + path + "' has an unexpected header");

  std::vector<CountRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    CountRecord rec;
    std::string cell;
    try {
      if (!std::getline(fields, rec.setting_id, ',')) throw std::invalid_argument("");
      if (!std::getline(fields, cell, ',')) throw std::invalid_argument("");
      rec.outcome_index = std::stoi(cell);
      if (!std::getline(fields, cell, ',')) throw std::invalid_argument("");
      rec.counts = std::stoll(cell);
      if (!std::getline(fields, cell)) throw std::invalid_argument("");
      rec.shots = std::stoll(cell);
    } catch (const std::exception&) {
      throw std::runtime_error("'" + path + "' line " + std::to_string(line_no) +
                               ": malformed count record");
    }
    if (rec.counts < 0 || rec.shots < rec.counts)
      throw std::runtime_error("'" + path + "' line " + std::to_string(line_no) +
                               ": counts exceed shots");
    records.push_back(std::move(rec));
  }
  return records;
}

namespace {

using nlohmann::json;

// Emits "BASIS:signs" when the outcomes are exactly the Pauli product-basis
// projectors in index order, otherwise explicit matrices.
bool matches_pauli_form(const MeasurementSetting& setting) {
  if (setting.basis.empty()) return false;
  const int n = static_cast<int>(setting.basis.size());
  if (static_cast<int>(setting.outcomes.size()) != (1 << n)) return false;
  const MeasurementSetting reference = pauli_setting(setting.basis);
  for (std::size_t o = 0; o < setting.outcomes.size(); ++o)
    if ((setting.outcomes[o].entries() - reference.outcomes[o].entries())
            .cwiseAbs()
            .maxCoeff() > 1e-12)
      return false;
  return true;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c)
      row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty())
    throw std::runtime_error("projector matrix must be a non-empty array");
  const int dim = static_cast<int>(rows.size());
  Matrix m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const json& row = rows.at(r);
    if (!row.is_array() || static_cast<int>(row.size()) != dim)
      throw std::runtime_error("projector matrix must be square");
    for (int c = 0; c < dim; ++c) {
      const json& cell = row.at(c);
      if (!cell.is_array() || cell.size() != 2)
        throw std::runtime_error("matrix entries must be [re, im] pairs");
      m(r, c) = Complex(cell.at(0).get<double>(), cell.at(1).get<double>());
    }
  }
  return m;
}

Projector projector_from_string(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= text.size())
    throw std::runtime_error("Pauli outcome must look like 'XZ:+-'");
  const std::string bases = text.substr(0, colon);
  const std::string signs = text.substr(colon + 1);
  if (bases.size() != signs.size())
    throw std::runtime_error("Pauli outcome bases and signs differ in length");
  StateVector v = pauli_eigenstate(bases[0], signs[0] == '-' ? 1 : 0);
  for (std::size_t q = 0; q < bases.size(); ++q) {
    if (signs[q] != '+' && signs[q] != '-')
      throw std::runtime_error("Pauli outcome signs must be '+' or '-'");
    if (q > 0) v = tensor(v, pauli_eigenstate(bases[q], signs[q] == '-' ? 1 : 0));
  }
  return Projector::onto(v);
}

}  // namespace

void write_projector_set_json(const std::string& path,
                              const std::vector<MeasurementSetting>& settings) {
  validate_settings(settings);
  json root;
  root["settings"] = json::array();
  for (const MeasurementSetting& s : settings) {
    json entry;
    entry["id"] = s.id;
    if (!s.basis.empty()) entry["basis"] = s.basis;
    json outcomes = json::array();
    if (matches_pauli_form(s)) {
      const int n = static_cast<int>(s.basis.size());
      for (int o = 0; o < static_cast<int>(s.outcomes.size()); ++o) {
        std::string signs;
        for (int q = 0; q < n; ++q)
          signs += ((o >> (n - 1 - q)) & 1) ? '-' : '+';
        outcomes.push_back(s.basis + ":" + signs);
      }
    } else {
      for (const Projector& p : s.outcomes) outcomes.push_back(matrix_to_json(p.entries()));
    }
    entry["outcomes"] = std::move(outcomes);
    root["settings"].push_back(std::move(entry));
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << root.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::vector<MeasurementSetting> read_projector_set_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& err) {
    throw std::runtime_error("'" + path + "': " + err.what());
  }

  if (!root.is_object() || !root.contains("settings") || !root["settings"].is_array())
    throw std::runtime_error("'" + path + "' must contain a 'settings' array");

  std::vector<MeasurementSetting> settings;
  for (const json& entry : root["settings"]) {
    MeasurementSetting s;
    s.id = entry.value("id", "");
    s.basis = entry.value("basis", "");
    if (!entry.contains("outcomes") || !entry["outcomes"].is_array())
      throw std::runtime_error("setting '" + s.id + "' must list outcomes");
    for (const json& outcome : entry["outcomes"]) {
      if (outcome.is_string())
        s.outcomes.push_back(projector_from_string(outcome.get<std::string>()));
      else
        s.outcomes.push_back(Projector(matrix_from_json(outcome)));
    }
    settings.push_back(std::move(s));
  }
  validate_settings(settings);
  return settings;
}

}  // namespace hyqsim
