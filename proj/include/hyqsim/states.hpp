// Canonical two-photon states on the path/transverse-mode chip and the local
// noise operations used throughout the toolkit.
//
// Qubit ordering convention (fixed everywhere in this project): the four
// qubits are, from most to least significant,
//
//   (mode_signal, mode_idler, path_signal, path_idler)
//
// so a computational basis index is
//
//   index = 8*mode_signal + 4*mode_idler + 2*path_signal + 1*path_idler
//
// and tensor products place the first operand on the most significant side.
#pragma once

#include <string>

#include "hyqsim/quantum.hpp"

namespace hyqsim {

enum class Photon { signal, idler };
enum class Dof { path, mode };  // which physical degree of freedom carries the qubit

// One of the four qubits: a degree of freedom of one photon.
struct DofAddress {
  Photon photon;
  Dof dof;
};

// Bit position of a qubit inside the 4-qubit basis index (3 = most significant).
int qubit_bit(const DofAddress& address);

enum class BellKind { phi_plus, phi_minus, psi_plus, psi_minus };

// Two-qubit Bell state, e.g. phi_plus = (|00> + |11>)/sqrt(2).
StateVector bell_state(BellKind kind);

// (|0000> + |1111>)/sqrt(2) in the ordering above: both photons in the
// fundamental mode and the first path, superposed with both in the excited
// mode and the second path. Relative phase is zero.
StateVector ghz4_state();

// Product of Bell pairs, one in the mode pair and one in the path pair:
// phi_plus(mode) x phi_plus(path). Non-zero amplitudes 1/2 at indices
// 0, 3, 12 and 15.
StateVector hyperentangled_state();

// Named lookup used by the command-line front end: "ghz4", "hyper",
// "bell-phi-plus", "bell-phi-minus", "bell-psi-plus", "bell-psi-minus".
StateVector state_by_name(const std::string& name);

// Conjugation by X on a single qubit of a 16-dimensional state.
DensityMatrix apply_bit_flip(const DensityMatrix& rho, const DofAddress& where);

// lambda * rho + (1 - lambda)/dim * I with lambda in [0,1].
DensityMatrix mix_with_white_noise(const DensityMatrix& rho, double lambda);

}  // namespace hyqsim
