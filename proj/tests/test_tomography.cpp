#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "hyqsim/states.hpp"
#include "hyqsim/tomography.hpp"

using namespace hyqsim;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

Matrix random_unitary(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix a(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) a(r, c) = Complex(gauss(rng), gauss(rng));
  const Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ();
}

}  // namespace

TEST_CASE("pauli eigenstates diagonalize their operator") {
  for (char basis : {'X', 'Y', 'Z'}) {
    const Eigen::Matrix2cd op = pauli_matrix(basis);
    for (int which : {0, 1}) {
      const StateVector v = pauli_eigenstate(basis, which);
      const double sign = which == 0 ? 1.0 : -1.0;
      CHECK((op * v.amplitudes() - sign * v.amplitudes()).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  CHECK_THROWS_AS(pauli_eigenstate('Q', 0), std::invalid_argument);
  CHECK_THROWS_AS(pauli_eigenstate('X', 2), std::invalid_argument);
}

TEST_CASE("pauli settings resolve the identity") {
  const MeasurementSetting setting = pauli_setting("XZY");
  CHECK(setting.outcomes.size() == 8);
  Matrix sum = Matrix::Zero(8, 8);
  for (const Projector& p : setting.outcomes) sum += p.entries();
  CHECK((sum - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_NOTHROW(validate_setting(setting));
}

TEST_CASE("setting catalogues have the expected shapes") {
  const auto complete2 = complete_pauli_settings(2);
  CHECK(complete2.size() == 9);
  std::size_t outcomes2 = 0;
  for (const auto& s : complete2) outcomes2 += s.outcomes.size();
  CHECK(outcomes2 == 36);

  const auto complete4 = complete_pauli_settings(4);
  CHECK(complete4.size() == 81);
  std::size_t outcomes4 = 0;
  for (const auto& s : complete4) outcomes4 += s.outcomes.size();
  CHECK(outcomes4 == 1296);

  const auto restricted = restricted_settings_no_mode_y();
  CHECK(restricted.size() == 36);
  std::size_t outcomes_r = 0;
  for (const auto& s : restricted) outcomes_r += s.outcomes.size();
  CHECK(outcomes_r == 576);
  for (const auto& s : restricted) {
    CHECK(s.basis[0] != 'Y');
    CHECK(s.basis[1] != 'Y');
  }

  const auto xz = restricted_settings_xz_only();
  CHECK(xz.size() == 16);

  CHECK_NOTHROW(validate_settings(complete2));
  CHECK_THROWS_AS(settings_by_name("restricted", 2), std::invalid_argument);
  CHECK_THROWS_AS(settings_by_name("bogus", 4), std::invalid_argument);
}

TEST_CASE("settings reject duplicate ids and over-identity sums") {
  auto settings = complete_pauli_settings(1);
  settings.push_back(settings.front());
  CHECK_THROWS_AS(validate_settings(settings), std::invalid_argument);

  MeasurementSetting doubled = pauli_setting("Z");
  doubled.outcomes.push_back(doubled.outcomes.front());
  CHECK_THROWS_AS(validate_setting(doubled), std::invalid_argument);
}

TEST_CASE("measurement rank distinguishes complete and restricted sets") {
  CHECK(measurement_rank({pauli_setting("Z")}) == 2);
  CHECK(measurement_rank(complete_pauli_settings(1)) == 4);
  CHECK(measurement_rank(complete_pauli_settings(2)) == 16);
  CHECK(reconstruction_gauge_dimension(complete_pauli_settings(2)) == 0);

  // One Pauli product basis spans 2^n dimensions.
  CHECK(measurement_rank({pauli_setting("XX")}) == 4);

  // The rank is basis independent: conjugating every projector by one
  // unitary does not change it.
  std::mt19937_64 rng(5);
  const Matrix u = random_unitary(4, rng);
  std::vector<MeasurementSetting> rotated;
  for (const auto& s : complete_pauli_settings(2)) {
    MeasurementSetting r;
    r.id = s.id;
    for (const Projector& p : s.outcomes)
      r.outcomes.push_back(Projector(u * p.entries() * u.adjoint()));
    rotated.push_back(std::move(r));
  }
  CHECK(measurement_rank(rotated) == 16);
}

TEST_CASE("four-qubit projector sets span the documented operator subspaces") {
  CHECK(measurement_rank(complete_pauli_settings(4)) == 256);
  CHECK(measurement_rank(restricted_settings_no_mode_y()) == 144);
  CHECK(measurement_rank(restricted_settings_xz_only()) == 81);
  CHECK(reconstruction_gauge_dimension(restricted_settings_no_mode_y()) == 112);
}

TEST_CASE("simulated counts are deterministic and track the Born rule") {
  const DensityMatrix rho = DensityMatrix::maximally_mixed(4);
  const auto settings = complete_pauli_settings(2);

  const auto a = simulate_counts(rho, settings, 1000000, 42);
  const auto b = simulate_counts(rho, settings, 1000000, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].counts == b[i].counts);
    CHECK(a[i].shots == b[i].shots);
    CHECK(a[i].counts <= a[i].shots);
  }
  const auto c = simulate_counts(rho, settings, 1000000, 43);
  bool any_different = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].counts != c[i].counts) any_different = true;
  CHECK(any_different);

  // Frequencies approach the flat 1/4 within 5 sigma.
  const auto freq = observed_frequencies(a);
  for (double f : freq) CHECK(std::abs(f - 0.25) < 0.0025);
}

TEST_CASE("zero-probability outcomes never draw counts") {
  Vector zero_state = Vector::Zero(2);
  zero_state(0) = 1.0;
  const DensityMatrix rho = DensityMatrix::from_pure(StateVector{zero_state});
  const auto records = simulate_counts(rho, {pauli_setting("Z")}, 100000, 7);
  REQUIRE(records.size() == 2);
  CHECK(records[0].counts > 0);
  CHECK(records[1].counts == 0);
  CHECK(records[0].shots == records[0].counts);
}

TEST_CASE("exact counts are rounded expectations") {
  const DensityMatrix rho = DensityMatrix::from_pure(bell_state(BellKind::phi_plus));
  const auto records = exact_counts(rho, {pauli_setting("ZZ")}, 1000);
  REQUIRE(records.size() == 4);
  CHECK(records[0].counts == 500);  // |00>
  CHECK(records[1].counts == 0);
  CHECK(records[2].counts == 0);
  CHECK(records[3].counts == 500);  // |11>
}

TEST_CASE("uniform records reconstruct the maximally mixed state") {
  const auto settings = complete_pauli_settings(2);
  std::vector<CountRecord> records;
  for (const auto& s : settings)
    for (int o = 0; o < 4; ++o) records.push_back({s.id, o, 1000, 4000});
  const DensityMatrix rho = mle_reconstruct(records, settings);
  CHECK((rho.entries() - Matrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("maximum likelihood recovers a Bell state from exact counts") {
  const StateVector target = bell_state(BellKind::phi_plus);
  const DensityMatrix rho = DensityMatrix::from_pure(target);
  const auto settings = complete_pauli_settings(2);
  const auto records = exact_counts(rho, settings, 10000000);

  MleOptions options;
  options.track_likelihood = true;
  const MleReport report = mle_reconstruct_report(records, settings, options);

  CHECK(report.converged);
  CHECK(fidelity_pure(report.rho, target) >= 0.9999);
  CHECK(trace_distance(report.rho, rho) < 1e-4);

  REQUIRE(report.likelihood_trace.size() >= 2);
  for (std::size_t i = 1; i < report.likelihood_trace.size(); ++i)
    CHECK(report.likelihood_trace[i] >= report.likelihood_trace[i - 1] - 1e-12);
}

TEST_CASE("maximum likelihood tolerates sampling noise") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector amps(4);
  for (int i = 0; i < 4; ++i) amps(i) = Complex(gauss(rng), gauss(rng));
  const StateVector target = StateVector::normalized(amps);
  const DensityMatrix rho = DensityMatrix::from_pure(target);

  const auto settings = complete_pauli_settings(2);
  const auto records = simulate_counts(rho, settings, 1000000, 23);
  const DensityMatrix estimate = mle_reconstruct(records, settings);
  CHECK(fidelity_pure(estimate, target) >= 0.99);
}

TEST_CASE("an incomplete projector set still matches the measured frequencies") {
  const DensityMatrix rho = DensityMatrix::from_pure(hyperentangled_state());
  const auto settings = restricted_settings_no_mode_y();
  const auto records = exact_counts(rho, settings, 10000000);

  const MleReport report = mle_reconstruct_report(records, settings);
  const auto predicted = predicted_probabilities(report.rho, records, settings);
  const auto observed = observed_frequencies(records);
  double max_dev = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    max_dev = std::max(max_dev, std::abs(predicted[i] - observed[i]));
  CHECK(max_dev < 1e-4);
}

TEST_CASE("reconstruction rejects malformed records") {
  const auto settings = complete_pauli_settings(1);
  CHECK_THROWS_AS(mle_reconstruct({}, settings), std::invalid_argument);
  CHECK_THROWS_AS(mle_reconstruct({{"W", 0, 10, 10}}, settings), std::invalid_argument);
  CHECK_THROWS_AS(mle_reconstruct({{"Z", 9, 10, 10}}, settings), std::invalid_argument);
  CHECK_THROWS_AS(mle_reconstruct({{"Z", 0, -1, 10}}, settings), std::invalid_argument);
  CHECK_THROWS_AS(mle_reconstruct({{"Z", 0, 0, 0}}, settings), std::invalid_argument);
}

TEST_CASE("count expectations read off stabilizer values") {
  const DensityMatrix rho = DensityMatrix::from_pure(bell_state(BellKind::phi_plus));
  const auto settings = complete_pauli_settings(2);
  const auto records = exact_counts(rho, settings, 1000000);

  CHECK(expectation_from_counts(records, settings, pauli_string("XX")) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(expectation_from_counts(records, settings, pauli_string("YY")) ==
        doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(expectation_from_counts(records, settings, pauli_string("ZZ")) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(expectation_from_counts(records, settings, pauli_string("XI")) ==
        doctest::Approx(0.0).epsilon(1e-9));

  // No provided setting diagonalizes YY if only the XX basis was measured.
  const std::vector<MeasurementSetting> only_xx = {pauli_setting("XX")};
  const auto xx_records = exact_counts(rho, only_xx, 1000);
  CHECK_THROWS_AS(expectation_from_counts(xx_records, only_xx, pauli_string("YY")),
                  std::invalid_argument);
}

TEST_CASE("direct fidelity estimation matches the true overlap") {
  const StateVector target = bell_state(BellKind::phi_plus);
  const DensityMatrix noisy =
      mix_with_white_noise(DensityMatrix::from_pure(target), 0.9);
  const auto settings = complete_pauli_settings(2);
  const auto estimator = direct_fidelity_estimator(target, settings);

  const auto records = exact_counts(noisy, settings, 10000000);
  CHECK(estimator(records) == doctest::Approx(fidelity_pure(noisy, target)).epsilon(1e-5));

  // The no-mode-Y restricted set cannot measure the YY-type terms of the
  // hyperentangled target.
  CHECK_THROWS_AS(
      direct_fidelity_estimator(hyperentangled_state(), restricted_settings_no_mode_y()),
      std::invalid_argument);
}

TEST_CASE("bootstrap of a constant estimator collapses to zero error") {
  const DensityMatrix rho = DensityMatrix::maximally_mixed(2);
  const auto records = exact_counts(rho, {pauli_setting("Z")}, 1000);
  const auto result = bootstrap_estimate(
      records, [](const std::vector<CountRecord>&) { return 0.5; }, 500, 11);
  CHECK(result.mean == doctest::Approx(0.5));
  CHECK(result.standard_error == doctest::Approx(0.0));
  CHECK(result.resamples_used < 500);  // early convergence
  CHECK(result.estimator_failures == 0);
}

TEST_CASE("bootstrap results are reproducible for a fixed seed") {
  const DensityMatrix rho =
      mix_with_white_noise(DensityMatrix::from_pure(bell_state(BellKind::phi_plus)), 0.9);
  const auto settings = complete_pauli_settings(2);
  const auto records = simulate_counts(rho, settings, 100000, 3);
  const auto estimator = direct_fidelity_estimator(bell_state(BellKind::phi_plus), settings);

  const auto a = bootstrap_estimate(records, estimator, 120, 77);
  const auto b = bootstrap_estimate(records, estimator, 120, 77);
  CHECK(a.mean == b.mean);
  CHECK(a.standard_error == b.standard_error);
  CHECK(a.resamples_used == b.resamples_used);

  const auto c = bootstrap_estimate(records, estimator, 120, 78);
  CHECK(a.standard_error != c.standard_error);
}

TEST_CASE("bootstrap error shrinks like the square root of the shot count") {
  const DensityMatrix rho =
      mix_with_white_noise(DensityMatrix::from_pure(bell_state(BellKind::phi_plus)), 0.9);
  const auto settings = complete_pauli_settings(2);
  const auto estimator = direct_fidelity_estimator(bell_state(BellKind::phi_plus), settings);

  const auto small = simulate_counts(rho, settings, 10000, 5);
  const auto large = simulate_counts(rho, settings, 160000, 6);
  const auto se_small = bootstrap_estimate(small, estimator, 400, 9).standard_error;
  const auto se_large = bootstrap_estimate(large, estimator, 400, 10).standard_error;
  CHECK(se_small / se_large == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("bootstrap surfaces estimator failures") {
  const DensityMatrix rho = DensityMatrix::maximally_mixed(2);
  const auto records = exact_counts(rho, {pauli_setting("Z")}, 1000);

  CHECK_THROWS_AS(bootstrap_estimate(
                      records,
                      [](const std::vector<CountRecord>&) -> double {
                        throw std::runtime_error("always fails");
                      },
                      50, 1),
                  std::runtime_error);

  // Occasional failures are skipped and reported.
  const auto result = bootstrap_estimate(
      records,
      [](const std::vector<CountRecord>& r) -> double {
        if (r.front().counts % 7 == 0) throw std::runtime_error("unlucky resample");
        return static_cast<double>(r.front().counts);
      },
      200, 13);
  CHECK(result.estimator_failures > 0);
  CHECK(result.resamples_used > 0);
}

TEST_CASE("count records round-trip through CSV") {
  const DensityMatrix rho = DensityMatrix::from_pure(bell_state(BellKind::phi_plus));
  const auto settings = complete_pauli_settings(2);
  const auto records = simulate_counts(rho, settings, 10000, 21);

  const auto path = temp_file("hyqsim_counts_test.csv");
  write_count_records_csv(path.string(), records, {"seed=21", "origin=unit-test"});
  const auto loaded = read_count_records_csv(path.string());
  REQUIRE(loaded.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].setting_id == records[i].setting_id);
    CHECK(loaded[i].outcome_index == records[i].outcome_index);
    CHECK(loaded[i].counts == records[i].counts);
    CHECK(loaded[i].shots == records[i].shots);
  }
  std::filesystem::remove(path);
}

TEST_CASE("count CSV reader reports malformed lines") {
  const auto path = temp_file("hyqsim_bad_counts.csv");
  {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    REQUIRE(f != nullptr);
    std::fputs("setting_id,outcome_index,counts,shots\nXX,0,12,100\nXX,not_a_number,3,100\n",
               f);
    std::fclose(f);
  }
  try {
    read_count_records_csv(path.string());
    FAIL("expected an exception");
  } catch (const std::runtime_error& err) {
    CHECK(std::string(err.what()).find("line 3") != std::string::npos);
  }
  std::filesystem::remove(path);

  const auto overflow = temp_file("hyqsim_overflow_counts.csv");
  {
    std::FILE* f = std::fopen(overflow.string().c_str(), "wb");
    REQUIRE(f != nullptr);
    std::fputs("setting_id,outcome_index,counts,shots\nXX,0,200,100\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(read_count_records_csv(overflow.string()), std::runtime_error);
  std::filesystem::remove(overflow);
}

TEST_CASE("projector sets round-trip through JSON in both encodings") {
  const auto path = temp_file("hyqsim_projectors_test.json");

  // Pauli-basis form.
  const auto settings = complete_pauli_settings(2);
  write_projector_set_json(path.string(), settings);
  const auto loaded = read_projector_set_json(path.string());
  REQUIRE(loaded.size() == settings.size());
  for (std::size_t s = 0; s < settings.size(); ++s) {
    CHECK(loaded[s].id == settings[s].id);
    REQUIRE(loaded[s].outcomes.size() == settings[s].outcomes.size());
    for (std::size_t o = 0; o < settings[s].outcomes.size(); ++o)
      CHECK((loaded[s].outcomes[o].entries() - settings[s].outcomes[o].entries())
                .cwiseAbs()
                .maxCoeff() < 1e-12);
  }

  // Explicit matrix form survives as well.
  std::mt19937_64 rng(31);
  const Matrix u = random_unitary(2, rng);
  std::vector<MeasurementSetting> rotated;
  MeasurementSetting custom;
  custom.id = "rotated-z";
  for (const Projector& p : pauli_setting("Z").outcomes)
    custom.outcomes.push_back(Projector(u * p.entries() * u.adjoint()));
  rotated.push_back(std::move(custom));
  write_projector_set_json(path.string(), rotated);
  const auto loaded_rotated = read_projector_set_json(path.string());
  REQUIRE(loaded_rotated.size() == 1);
  CHECK((loaded_rotated[0].outcomes[0].entries() - rotated[0].outcomes[0].entries())
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  std::filesystem::remove(path);
}

TEST_CASE("projector JSON reader rejects malformed files") {
  const auto path = temp_file("hyqsim_bad_projectors.json");
  {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    REQUIRE(f != nullptr);
    std::fputs("{\"settings\": [{\"id\": \"bad\", \"outcomes\": [\"XZ\"]}]}", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(read_projector_set_json(path.string()), std::runtime_error);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_projector_set_json("/nonexistent/projectors.json"),
                  std::runtime_error);
}
