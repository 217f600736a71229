// Single-copy entanglement distillation: a transversal path-to-mode CNOT on
// both photons, post-selection on correlated transverse modes, and the
// count-level pipeline that sweeps the path bit-flip error rate.
//
// Hardware note: on the chip the mode measurement physically happens first
// (mode demultiplexers sit before the path interferometers), which commutes
// with the path analysis because the two degrees of freedom are measured on
// separate carriers. The simulation applies the CNOT to the full state and
// post-selects afterwards; the two orderings give identical statistics.
#pragma once

#include <array>
#include <vector>

#include "hyqsim/states.hpp"
#include "hyqsim/tomography.hpp"

namespace hyqsim {

// Transversal CNOT with each photon's path qubit as control and its mode
// qubit as target: |m_s, m_i, p_s, p_i> -> |m_s + p_s, m_i + p_i, p_s, p_i>
// (addition mod 2). Returns the 16x16 permutation unitary.
Matrix local_cnot();

DensityMatrix apply_local_cnot(const DensityMatrix& rho);

// Which qubits of one photon pair a correlated error hits.
struct FlipScenario {
  bool path_flip = false;
  bool mode_flip = false;
};

// Scenario order used throughout: none, path only, mode only, both.
std::array<FlipScenario, 4> all_flip_scenarios();

// Probabilities of (no flip, exactly one flip, both flips) for independent
// path and mode flips at rate p: ((1-p)^2, p(1-p), p^2).
struct FlipWeights {
  double none = 1.0;
  double one = 0.0;
  double both = 0.0;
};
FlipWeights flip_weights(double p);

// Resource state with the scenario's flips applied to one photon's qubits.
DensityMatrix scenario_state(const DensityMatrix& resource, const FlipScenario& scenario,
                             Photon flipped_photon);

// Normalized 16-outcome count distributions for each flip scenario under
// each stabilizer analysis setting (path qubits in the XX / YY / ZZ bases,
// mode qubits read out in Z).
struct ScenarioCounts {
  std::vector<std::string> setting_labels;
  // counts[scenario][setting] is a 16-entry distribution summing to 1.
  std::array<std::vector<Eigen::VectorXd>, 4> counts;
};

ScenarioCounts scenario_counts(const DensityMatrix& resource, Photon flipped_photon,
                               bool with_cnot);

// Convex per-setting combination of the four scenario distributions with
// the flip weights of error rate p; outputs sum to 1.
std::vector<Eigen::VectorXd> scale_counts(const ScenarioCounts& scenarios, double p);

// Bell fidelity from stabilizer expectations: (1 + <XX> - <YY> + <ZZ>) / 4,
// clamped to [0,1].
double stabilizer_fidelity(double xx, double yy, double zz);

// Probability that a mode Z measurement finds both photons in the same
// transverse mode (correlated = true) or opposite modes (correlated = false).
double mode_postselection_probability(const DensityMatrix& rho, bool correlated);

struct Postselection {
  DensityMatrix path_state;
  double success_probability = 0.0;
};

// Path-qubit state conditioned on correlated transverse modes. Success
// probabilities below 1e-12 leave no state to normalize and are rejected.
Postselection postselect_mode_correlated(const DensityMatrix& rho);

struct SweepPoint {
  double p = 0.0;
  double fidelity = 0.0;
  double success_probability = 1.0;
};

// Path-state Bell fidelity versus flip rate, from the count-level stabilizer
// pipeline. With distillation the counts pass through the CNOT and are
// post-selected on correlated modes; without it the modes are ignored.
std::vector<SweepPoint> distill_sweep(const DensityMatrix& resource,
                                      const std::vector<double>& p_grid,
                                      bool with_distillation,
                                      Photon flipped_photon = Photon::idler);

// Same sweep point evaluated by simulating counts on the post-selected path
// state and reconstructing it with the iterative maximum-likelihood solver.
struct MleSweepPoint {
  double p = 0.0;
  double fidelity = 0.0;
  double success_probability = 1.0;
  bool converged = false;
  // True when the reconstruction is dominated by the target Bell state
  // (fidelity above 1/2); past p = 1/2 the orthogonal Bell state takes over
  // and a target-state reconstruction is no longer meaningful.
  bool target_dominant = false;
};

MleSweepPoint distill_point_mle(const DensityMatrix& resource, double p,
                                bool with_distillation, long long shots,
                                std::uint64_t seed,
                                Photon flipped_photon = Photon::idler);

}  // namespace hyqsim
