// Physical-device layer: pump configuration and source distinguishability,
// the biphoton state generated on the chip, Mach-Zehnder transfer matrices
// and the reverse-Hong-Ou-Mandel fringe model.
#pragma once

#include <array>
#include <vector>

#include "hyqsim/quantum.hpp"

namespace hyqsim {

// Coherent pump amplitudes over the four sources, indexed by
// 2*spiral + te_mode (spiral in {0,1}, transverse mode in {TE0=0, TE1=1}).
// The amplitude vector is unit-norm within kNormTol.
struct PumpConfig {
  std::array<Complex, 4> amplitudes;

  // Rescales to unit norm; rejects an all-zero configuration.
  static PumpConfig normalized(std::array<Complex, 4> amplitudes);

  // Equal pumping of all four sources.
  static PumpConfig uniform();

  // Pumps the two sources whose pair emissions span the GHZ superposition
  // (spiral 0 in TE0 and spiral 1 in TE1).
  static PumpConfig ghz();

  void validate() const;
};

// Pairwise indistinguishability of the four sources plus optional per-source
// detection efficiency. `visibility` is symmetric with unit diagonal and
// entries in [0,1]; it need not be positive semidefinite, so the generated
// state is clamped onto the physical cone.
struct SourceModel {
  Eigen::Matrix4d visibility = Eigen::Matrix4d::Identity();
  std::array<double, 4> efficiency{1.0, 1.0, 1.0, 1.0};
  // Relative weight of spurious pairs emitted into opposite transverse modes
  // of one spiral; 0 disables the contribution.
  double intermodal_pair_weight = 0.0;

  static SourceModel ideal();                 // all visibilities 1
  static SourceModel uniform(double offdiag); // constant off-diagonal visibility

  void validate() const;
};

// Phase settings of a bank of on-chip interferometers, stored modulo 2*pi.
struct InterferometerSetting {
  explicit InterferometerSetting(std::vector<double> phases);
  const std::vector<double>& phases() const { return phases_; }

 private:
  std::vector<double> phases_;
};

// Transfer matrix of one Mach-Zehnder interferometer:
//
//   U = S * diag(e^{i theta}, 1) * S * diag(e^{i phi_ext}, 1),
//   S = (1/sqrt(2)) [[1, i], [i, 1]]
//
// which gives |U_00|^2 = sin^2(theta/2). theta = 0 routes cross (a swap up
// to global phase); theta = pi routes bar, where the moduli match the
// identity but det U = e^{i theta} fixes an unavoidable relative phase.
Eigen::Matrix2cd mzi_transfer(double internal_phase, double external_phase = 0.0);

// Two-photon state generated by pumping the four sources coherently. Pair
// emission is quadratic in the pump, so source k = (spiral s, mode m) with
// amplitude a_k contributes amplitude a_k^2 (scaled by sqrt of efficiency) on
// the basis state with both photons in mode m and both paths on spiral s.
// Off-diagonal coherences are damped by the pairwise visibility.
DensityMatrix biphoton_state(const PumpConfig& pump, const SourceModel& source);

// Two-photon coincidence fringe of the reverse-Hong-Ou-Mandel interference,
// cos^2(phi): twice the frequency of the single-photon fringe.
double rhom_coincidence(double phi);

// Single-photon (classical) fringe cos^2(phi/2).
double classical_fringe(double phi);

// Coincidence fringe with reduced contrast: (1 + V cos(2 phi)) / 2.
double rhom_fringe_noisy(double phi, double visibility);

// (max - min) / (max + min) over the samples; rejects inputs whose maximum
// is not positive.
double fringe_visibility(const std::vector<double>& samples);

// Dominant oscillation frequency of samples taken on a uniform phase grid
// over [0, 2*pi): least-squares fit of offset + cosine + sine, scanning the
// frequency and refining the best candidate by golden-section search.
double fit_fringe_frequency(const std::vector<double>& samples);

}  // namespace hyqsim
