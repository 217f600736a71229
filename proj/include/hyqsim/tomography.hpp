// Projective measurement simulation and iterative maximum-likelihood state
// reconstruction, including deliberately incomplete projector sets, plus
// count-level bootstrap error bars and the file formats for both.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hyqsim/quantum.hpp"

namespace hyqsim {

// One measurement configuration: a set of outcome projectors measured
// simultaneously. Outcome operators share the state dimension and sum to at
// most the identity (eigenvalues <= 1 + 1e-9).
struct MeasurementSetting {
  std::string id;
  std::vector<Projector> outcomes;
  // Per-qubit basis label ("XZ", "ZXXY", ...) when the setting is a Pauli
  // product basis; empty otherwise.
  std::string basis;
};

void validate_setting(const MeasurementSetting& setting);
void validate_settings(const std::vector<MeasurementSetting>& settings);

// Observed counts for one outcome of one setting.
struct CountRecord {
  std::string setting_id;
  int outcome_index = 0;
  long long counts = 0;
  long long shots = 0;  // total events recorded for the parent setting
};

// Eigenstate of a single-qubit Pauli: which = 0 picks the +1 eigenvector,
// which = 1 the -1 eigenvector.
StateVector pauli_eigenstate(char basis, int which);

// Full product-basis setting for a Pauli label; outcome index digits (most
// significant qubit first) select the -1 eigenvector per qubit.
MeasurementSetting pauli_setting(const std::string& label);

// All 3^n Pauli product bases on n qubits (informationally complete).
std::vector<MeasurementSetting> complete_pauli_settings(int n_qubits);

// Product bases built from a per-qubit choice of allowed Pauli axes.
std::vector<MeasurementSetting> product_settings(
    const std::vector<std::string>& axes_per_qubit);

// Four-qubit set without Y on the two transverse-mode qubits (mode
// interferometers lack the phase shifter needed for Y): 36 settings.
std::vector<MeasurementSetting> restricted_settings_no_mode_y();

// Four-qubit set with only X and Z on every qubit: 16 settings. Spans 81 of
// the 256 operator-space dimensions.
std::vector<MeasurementSetting> restricted_settings_xz_only();

// Named projector-set lookup used by the command-line front end:
// "complete" (dimension inferred from n_qubits), "restricted",
// "restricted-xz"; anything else is rejected.
std::vector<MeasurementSetting> settings_by_name(const std::string& name, int n_qubits);

// Poisson-sampled counts, mean shots * p(outcome), drawn per outcome in
// setting order from a generator seeded with `seed`. Outcomes with zero
// probability draw no sample and record zero. The per-record `shots` field
// holds the realized per-setting total so counts never exceed it.
std::vector<CountRecord> simulate_counts(const DensityMatrix& rho,
                                         const std::vector<MeasurementSetting>& settings,
                                         long long shots, std::uint64_t seed);

// Noiseless counts: round(shots * p(outcome)).
std::vector<CountRecord> exact_counts(const DensityMatrix& rho,
                                      const std::vector<MeasurementSetting>& settings,
                                      long long shots);

struct MleOptions {
  long long max_iterations = 100000;
  // Convergence: absolute log-likelihood change per accepted iteration.
  double convergence_threshold = 1e-10;
  // Keep the per-iteration log-likelihood trace in the report.
  bool track_likelihood = false;
};

struct MleReport {
  DensityMatrix rho;
  long long iterations = 0;
  double log_likelihood = 0.0;
  bool converged = false;
  // Times a predicted probability had to be floored at 1e-14.
  long long probability_floor_hits = 0;
  std::vector<double> likelihood_trace;  // only when track_likelihood
};

// Iterative maximum-likelihood reconstruction. Starts from the maximally
// mixed state and applies rho <- R rho R (trace-normalized) with
// R = sum_i f_i / p_i(rho) Pi_i, where f_i is the observed frequency
// normalized per setting and divided by the number of settings with data.
// A step that would lower the log-likelihood is diluted towards the
// identity, halving the step weight until the likelihood is non-decreasing,
// so the likelihood trace never decreases. Predicted probabilities below
// 1e-14 are floored (and counted) to keep the update finite.
MleReport mle_reconstruct_report(const std::vector<CountRecord>& records,
                                 const std::vector<MeasurementSetting>& settings,
                                 const MleOptions& options = {});

DensityMatrix mle_reconstruct(const std::vector<CountRecord>& records,
                              const std::vector<MeasurementSetting>& settings,
                              const MleOptions& options = {});

// Number of linearly independent operators among all outcome projectors
// (numerical rank of the vectorized projector matrix; informationally
// complete sets reach dim^2).
int measurement_rank(const std::vector<MeasurementSetting>& settings);

// dim^2 - measurement_rank: dimensions of state space the set cannot see.
int reconstruction_gauge_dimension(const std::vector<MeasurementSetting>& settings);

// Predicted outcome probabilities Tr(Pi rho), in the order of `records`.
std::vector<double> predicted_probabilities(const DensityMatrix& rho,
                                            const std::vector<CountRecord>& records,
                                            const std::vector<MeasurementSetting>& settings);

// Observed per-setting frequencies counts / setting_total, in record order.
std::vector<double> observed_frequencies(const std::vector<CountRecord>& records);

// Empirical expectation of a +-1-valued observable from the counts of the
// one provided setting that diagonalizes it.
double expectation_from_counts(const std::vector<CountRecord>& records,
                               const std::vector<MeasurementSetting>& settings,
                               const ObservableOperator& observable);

// Estimator of <target|rho|target> built from Pauli expectations: the target
// projector is decomposed over Pauli strings and every non-identity term is
// read from the one provided setting that diagonalizes it. Rejects setting
// collections that cannot measure some required term.
std::function<double(const std::vector<CountRecord>&)> direct_fidelity_estimator(
    const StateVector& target, const std::vector<MeasurementSetting>& settings);

struct BootstrapResult {
  double mean = 0.0;
  double standard_error = 0.0;
  long long resamples_used = 0;
  long long estimator_failures = 0;
};

// Parametric bootstrap: each resample redraws every count from
// Poisson(observed count) and re-runs the estimator. Stops early once the
// running standard deviation changes by under 1% across the trailing 10% of
// resamples (checked from 20 resamples on), otherwise at n_resamples.
// Resample r uses seed + r, so results are bit-identical for a fixed seed.
// Estimator exceptions skip the resample; more than half failing is an error.
BootstrapResult bootstrap_estimate(
    const std::vector<CountRecord>& records,
    const std::function<double(const std::vector<CountRecord>&)>& estimator,
    long long n_resamples, std::uint64_t seed);

// Count-record CSV: optional `# key=value` metadata lines, then the header
// `setting_id,outcome_index,counts,shots`; UTF-8, LF line endings.
void write_count_records_csv(const std::string& path,
                             const std::vector<CountRecord>& records,
                             const std::vector<std::string>& metadata = {});
std::vector<CountRecord> read_count_records_csv(const std::string& path);

// Projector-set JSON: each setting lists outcomes either as Pauli-basis
// strings ("XZ:+-") or as explicit row-major complex matrices with [re, im]
// entry pairs.
void write_projector_set_json(const std::string& path,
                              const std::vector<MeasurementSetting>& settings);
std::vector<MeasurementSetting> read_projector_set_json(const std::string& path);

}  // namespace hyqsim
