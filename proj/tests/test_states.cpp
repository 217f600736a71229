#include <doctest.h>

#include <cmath>

#include "hyqsim/states.hpp"

using namespace hyqsim;

TEST_CASE("qubit addresses map to the documented bit positions") {
  CHECK(qubit_bit({Photon::signal, Dof::mode}) == 3);
  CHECK(qubit_bit({Photon::idler, Dof::mode}) == 2);
  CHECK(qubit_bit({Photon::signal, Dof::path}) == 1);
  CHECK(qubit_bit({Photon::idler, Dof::path}) == 0);
}

TEST_CASE("GHZ state amplitudes sit at the all-zero and all-one strings") {
  const StateVector ghz = ghz4_state();
  REQUIRE(ghz.dim() == 16);
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < 16; ++i) {
    const double expected = (i == 0 || i == 15) ? r : 0.0;
    CHECK(std::abs(ghz.amplitude(i) - expected) < 1e-15);
  }
}

TEST_CASE("hyperentangled state is the product of two Bell pairs") {
  const StateVector hyper = hyperentangled_state();
  REQUIRE(hyper.dim() == 16);
  for (int i = 0; i < 16; ++i) {
    const double expected = (i == 0 || i == 3 || i == 12 || i == 15) ? 0.5 : 0.0;
    CHECK(std::abs(hyper.amplitude(i) - expected) < 1e-15);
  }
  const StateVector direct =
      tensor(bell_state(BellKind::phi_plus), bell_state(BellKind::phi_plus));
  CHECK((hyper.amplitudes() - direct.amplitudes()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("bell states are orthonormal") {
  const BellKind kinds[] = {BellKind::phi_plus, BellKind::phi_minus, BellKind::psi_plus,
                            BellKind::psi_minus};
  for (BellKind a : kinds)
    for (BellKind b : kinds) {
      const Complex overlap =
          (bell_state(a).amplitudes().adjoint() * bell_state(b).amplitudes())(0);
      CHECK(std::abs(overlap - (a == b ? 1.0 : 0.0)) < 1e-14);
    }
}

TEST_CASE("state_by_name covers the catalogue and rejects strangers") {
  CHECK(state_by_name("ghz4").dim() == 16);
  CHECK(state_by_name("hyper").dim() == 16);
  CHECK(state_by_name("bell-phi-plus").dim() == 4);
  CHECK(state_by_name("bell-psi-minus").dim() == 4);
  CHECK_THROWS_AS(state_by_name("w-state"), std::invalid_argument);
}

TEST_CASE("bit flips act on the addressed qubit only") {
  const DensityMatrix hyper = DensityMatrix::from_pure(hyperentangled_state());

  // Path flip on the idler turns the path pair into psi_plus.
  const DensityMatrix path_flipped =
      apply_bit_flip(hyper, {Photon::idler, Dof::path});
  const StateVector expected =
      tensor(bell_state(BellKind::phi_plus), bell_state(BellKind::psi_plus));
  CHECK(fidelity_pure(path_flipped, expected) == doctest::Approx(1.0).epsilon(1e-12));

  // Flipping twice is the identity.
  const DensityMatrix twice =
      apply_bit_flip(path_flipped, {Photon::idler, Dof::path});
  CHECK((twice.entries() - hyper.entries()).cwiseAbs().maxCoeff() < 1e-13);

  // Spectrum is preserved.
  const DensityMatrix mixed = mix_with_white_noise(hyper, 0.7);
  const DensityMatrix mixed_flipped = apply_bit_flip(mixed, {Photon::signal, Dof::mode});
  const auto before = mixed.eigenvalues();
  const auto after = mixed_flipped.eigenvalues();
  for (std::size_t i = 0; i < before.size(); ++i)
    CHECK(before[i] == doctest::Approx(after[i]).epsilon(1e-12));

  CHECK_THROWS_AS(
      apply_bit_flip(DensityMatrix::maximally_mixed(4), {Photon::idler, Dof::path}),
      std::invalid_argument);
}

TEST_CASE("white-noise mixing interpolates between the state and the identity") {
  const DensityMatrix ghz = DensityMatrix::from_pure(ghz4_state());
  const DensityMatrix all_noise = mix_with_white_noise(ghz, 0.0);
  CHECK((all_noise.entries() - Matrix::Identity(16, 16) / 16.0).cwiseAbs().maxCoeff() <
        1e-14);

  const DensityMatrix none = mix_with_white_noise(ghz, 1.0);
  CHECK((none.entries() - ghz.entries()).cwiseAbs().maxCoeff() < 1e-14);

  CHECK_THROWS_AS(mix_with_white_noise(ghz, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(mix_with_white_noise(ghz, 1.1), std::invalid_argument);
}
