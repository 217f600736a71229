#include "hyqsim/states.hpp"

#include <cmath>
#include <stdexcept>

namespace hyqsim {

int qubit_bit(const DofAddress& address) {
  const int photon_offset = (address.photon == Photon::signal) ? 1 : 0;
  return (address.dof == Dof::mode) ? 2 + photon_offset : photon_offset;
}

StateVector bell_state(BellKind kind) {
  Vector v = Vector::Zero(4);
  const double r = 1.0 / std::sqrt(2.0);
  switch (kind) {
    case BellKind::phi_plus:  v(0) = r; v(3) = r;  break;
    case BellKind::phi_minus: v(0) = r; v(3) = -r; break;
    case BellKind::psi_plus:  v(1) = r; v(2) = r;  break;
    case BellKind::psi_minus: v(1) = r; v(2) = -r; break;
  }
  return StateVector(std::move(v));
}

StateVector ghz4_state() {
  Vector v = Vector::Zero(16);
  const double r = 1.0 / std::sqrt(2.0);
  v(0) = r;
  v(15) = r;
  return StateVector(std::move(v));
}

StateVector hyperentangled_state() {
  return tensor(bell_state(BellKind::phi_plus), bell_state(BellKind::phi_plus));
}

StateVector state_by_name(const std::string& name) {
  if (name == "ghz4") return ghz4_state();
  if (name == "hyper") return hyperentangled_state();
  if (name == "bell-phi-plus") return bell_state(BellKind::phi_plus);
  if (name == "bell-phi-minus") return bell_state(BellKind::phi_minus);
  if (name == "bell-psi-plus") return bell_state(BellKind::psi_plus);
  if (name == "bell-psi-minus") return bell_state(BellKind::psi_minus);
  throw std::invalid_argument("unknown state name '" + name + "'");
}

DensityMatrix apply_bit_flip(const DensityMatrix& rho, const DofAddress& where) {
  if (rho.dim() != 16)
    throw std::invalid_argument("bit flips are defined on the 16-dimensional two-photon state");
  const int mask = 1 << qubit_bit(where);
  Matrix out(16, 16);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) out(r ^ mask, c ^ mask) = rho.entries()(r, c);
  return DensityMatrix(std::move(out));
}

DensityMatrix mix_with_white_noise(const DensityMatrix& rho, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("mixing weight must lie in [0,1]");
  const int d = rho.dim();
  Matrix out = lambda * rho.entries() +
               (1.0 - lambda) / static_cast<double>(d) * Matrix::Identity(d, d);
  return DensityMatrix(std::move(out));
}

}  // namespace hyqsim
