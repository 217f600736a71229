#include "hyqsim/chip.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hyqsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Basis index of the pair state emitted by source k = (spiral s, mode m):
// both photons in mode m (bits 3 and 2) and both paths on spiral s (bits 1
// and 0), giving 12*m + 3*s.
int pair_basis_index(int spiral, int te_mode) {
  return 12 * te_mode + 3 * spiral;
}

}  // namespace

PumpConfig PumpConfig::normalized(std::array<Complex, 4> amplitudes) {
  double norm2 = 0.0;
  for (const Complex& a : amplitudes) norm2 += std::norm(a);
  const double norm = std::sqrt(norm2);
  if (!(norm > 1e-15))
    throw std::invalid_argument("pump configuration must drive at least one source");
  for (Complex& a : amplitudes) a /= norm;
  PumpConfig pump{amplitudes};
  pump.validate();
  return pump;
}

PumpConfig PumpConfig::uniform() {
  return normalized({1.0, 1.0, 1.0, 1.0});
}

PumpConfig PumpConfig::ghz() {
  return normalized({1.0, 0.0, 0.0, 1.0});
}

void PumpConfig::validate() const {
  double norm2 = 0.0;
  for (const Complex& a : amplitudes) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
      throw std::invalid_argument("pump amplitude is not finite");
    norm2 += std::norm(a);
  }
  if (std::abs(std::sqrt(norm2) - 1.0) > kNormTol)
    throw std::invalid_argument("pump amplitudes must have unit norm");
}

SourceModel SourceModel::ideal() {
  SourceModel model;
  model.visibility = Eigen::Matrix4d::Ones();
  return model;
}

SourceModel SourceModel::uniform(double offdiag) {
  SourceModel model;
  model.visibility = Eigen::Matrix4d::Constant(offdiag);
  model.visibility.diagonal().setOnes();
  model.validate();
  return model;
}

void SourceModel::validate() const {
  for (int j = 0; j < 4; ++j) {
    if (std::abs(visibility(j, j) - 1.0) > 1e-12)
      throw std::invalid_argument("visibility matrix must have unit diagonal");
    for (int k = 0; k < 4; ++k) {
      const double v = visibility(j, k);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw std::invalid_argument("visibility entries must lie in [0,1]");
      if (std::abs(v - visibility(k, j)) > 1e-12)
        throw std::invalid_argument("visibility matrix must be symmetric");
    }
  }
  for (double e : efficiency)
    if (!std::isfinite(e) || e < 0.0)
      throw std::invalid_argument("efficiencies must be non-negative");
  if (!std::isfinite(intermodal_pair_weight) || intermodal_pair_weight < 0.0)
    throw std::invalid_argument("intermodal pair weight must be non-negative");
}

InterferometerSetting::InterferometerSetting(std::vector<double> phases)
    : phases_(std::move(phases)) {
  for (double& p : phases_) {
    if (!std::isfinite(p)) throw std::invalid_argument("phase is not finite");
    p = std::fmod(p, kTwoPi);
    if (p < 0.0) p += kTwoPi;
  }
}

Eigen::Matrix2cd mzi_transfer(double internal_phase, double external_phase) {
  if (!std::isfinite(internal_phase) || !std::isfinite(external_phase))
    throw std::invalid_argument("interferometer phase is not finite");
  const Complex i(0.0, 1.0);
  Eigen::Matrix2cd splitter;
  splitter << 1.0, i, i, 1.0;
  splitter /= std::sqrt(2.0);
  Eigen::Matrix2cd internal = Eigen::Matrix2cd::Identity();
  internal(0, 0) = std::exp(i * internal_phase);
  Eigen::Matrix2cd external = Eigen::Matrix2cd::Identity();
  external(0, 0) = std::exp(i * external_phase);
  return splitter * internal * splitter * external;
}

DensityMatrix biphoton_state(const PumpConfig& pump, const SourceModel& source) {
  pump.validate();
  source.validate();

  // Pair amplitude of source k, quadratic in the pump and scaled by the
  // square root of its efficiency.
  std::array<Complex, 4> pair{};
  std::array<int, 4> index{};
  for (int s = 0; s < 2; ++s)
    for (int m = 0; m < 2; ++m) {
      const int k = 2 * s + m;
      pair[k] = pump.amplitudes[k] * pump.amplitudes[k] * std::sqrt(source.efficiency[k]);
      index[k] = pair_basis_index(s, m);
    }

  Matrix raw = Matrix::Zero(16, 16);
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k)
      raw(index[j], index[k]) += source.visibility(j, k) * pair[j] * std::conj(pair[k]);

  // Spurious pairs split across the two transverse modes of one spiral add
  // incoherent population with the photons' modes anti-correlated.
  if (source.intermodal_pair_weight > 0.0) {
    for (int s = 0; s < 2; ++s) {
      const Complex cross = pump.amplitudes[2 * s] * pump.amplitudes[2 * s + 1];
      const double population = source.intermodal_pair_weight * std::norm(cross);
      const int signal_te1 = 8 + 3 * s;  // signal in TE1, idler in TE0
      const int idler_te1 = 4 + 3 * s;   // signal in TE0, idler in TE1
      raw(signal_te1, signal_te1) += 0.5 * population;
      raw(idler_te1, idler_te1) += 0.5 * population;
    }
  }

  if (!(raw.trace().real() > 1e-30))
    throw std::runtime_error("pump configuration generates no photon pairs");
  raw /= raw.trace().real();
  // Valid visibility matrices need not be PSD; clamp onto the physical cone.
  return DensityMatrix::psd_clamped(raw);
}

double rhom_coincidence(double phi) {
  const double c = std::cos(phi);
  return c * c;
}

double classical_fringe(double phi) {
  const double c = std::cos(0.5 * phi);
  return c * c;
}

double rhom_fringe_noisy(double phi, double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0))
    throw std::invalid_argument("visibility must lie in [0,1]");
  return 0.5 * (1.0 + visibility * std::cos(2.0 * phi));
}

double fringe_visibility(const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("no fringe samples");
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (!(*hi > 0.0)) throw std::runtime_error("fringe visibility undefined for a dark fringe");
  return (*hi - *lo) / (*hi + *lo);
}

namespace {

// Residual of the least-squares fit a + b cos(w phi) + c sin(w phi) on a
// uniform grid over [0, 2*pi). Exactly zero when the data is a pure fringe
// at frequency w.
double fringe_fit_residual(const std::vector<double>& samples, double w) {
  const int n = static_cast<int>(samples.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (int k = 0; k < n; ++k) {
    const double phi = kTwoPi * k / n;
    design(k, 0) = 1.0;
    design(k, 1) = std::cos(w * phi);
    design(k, 2) = std::sin(w * phi);
    y(k) = samples[k];
  }
  const Eigen::VectorXd coeff =
      (design.transpose() * design)
          .ldlt()
          .solve(design.transpose() * y);
  return (design * coeff - y).squaredNorm();
}

}  // namespace

double fit_fringe_frequency(const std::vector<double>& samples) {
  if (samples.size() < 8)
    throw std::invalid_argument("too few samples for a frequency fit");
  const int n = static_cast<int>(samples.size());
  const double w_max = std::min(8.0, n / 4.0);

  double best_w = 0.25, best_r = std::numeric_limits<double>::infinity();
  for (double w = 0.25; w <= w_max; w += 0.02) {
    const double r = fringe_fit_residual(samples, w);
    if (r < best_r) {
      best_r = r;
      best_w = w;
    }
  }

  // Golden-section refinement around the coarse minimum.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::max(0.05, best_w - 0.02), b = best_w + 0.02;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = fringe_fit_residual(samples, x1), f2 = fringe_fit_residual(samples, x2);
  while (b - a > 1e-12) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = fringe_fit_residual(samples, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = fringe_fit_residual(samples, x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace hyqsim
