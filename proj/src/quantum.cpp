#include "hyqsim/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include <unsupported/Eigen/KroneckerProduct>

namespace hyqsim {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

double hermitian_deviation(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Snap values within `tol` of [0,1] onto the interval; reject anything
// further out, which can only arise from operands violating their invariants.
double snap_unit_interval(double value, double tol, const char* what) {
  if (value < 0.0) {
    if (value < -tol) throw std::runtime_error(std::string(what) + " outside [0,1]");
    return 0.0;
  }
  if (value > 1.0) {
    if (value > 1.0 + tol) throw std::runtime_error(std::string(what) + " outside [0,1]");
    return 1.0;
  }
  return value;
}

std::vector<long> index_strides(const std::vector<int>& dims) {
  std::vector<long> stride(dims.size());
  long acc = 1;
  for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
    stride[i] = acc;
    acc *= dims[i];
  }
  return stride;
}

}  // namespace

StateVector::StateVector(Vector amplitudes) : amps_(std::move(amplitudes)) {
  require(amps_.size() > 0, "state vector must be non-empty");
  require(amps_.allFinite(), "state vector has non-finite amplitudes");
  if (std::abs(amps_.norm() - 1.0) > kNormTol)
    throw std::invalid_argument("state vector norm deviates from 1");
}

StateVector StateVector::normalized(Vector amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 1e-15)) throw std::invalid_argument("cannot normalize a zero vector");
  return StateVector(amplitudes / norm);
}

Complex StateVector::amplitude(int index) const {
  require(index >= 0 && index < dim(), "amplitude index out of range");
  return amps_(index);
}

DensityMatrix::DensityMatrix(Matrix entries) : entries_(std::move(entries)) {
  require(entries_.rows() == entries_.cols() && entries_.rows() > 0,
          "density matrix must be square and non-empty");
  require(entries_.allFinite(), "density matrix has non-finite entries");
  if (hermitian_deviation(entries_) > kHermitianTol)
    throw std::invalid_argument("density matrix is not Hermitian");
  if (std::abs(entries_.trace().real() - 1.0) > kTraceTol ||
      std::abs(entries_.trace().imag()) > kTraceTol)
    throw std::invalid_argument("density matrix trace deviates from 1");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -kEigenvalueTol)
    throw std::invalid_argument("density matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi) {
  Matrix m = psi.amplitudes() * psi.amplitudes().adjoint();
  return DensityMatrix(std::move(m), Trusted{});
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  require(dim > 0, "dimension must be positive");
  Matrix m = Matrix::Identity(dim, dim) / static_cast<double>(dim);
  return DensityMatrix(std::move(m), Trusted{});
}

namespace {

DensityMatrix clamp_spectrum(const Matrix& raw, double reject_below) {
  if (raw.rows() != raw.cols() || raw.rows() == 0)
    throw std::invalid_argument("density matrix must be square and non-empty");
  if (!raw.allFinite())
    throw std::invalid_argument("density matrix has non-finite entries");
  Matrix herm = 0.5 * (raw + raw.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm);
  Eigen::VectorXd vals = solver.eigenvalues();
  for (int i = 0; i < vals.size(); ++i) {
    if (vals(i) < reject_below)
      throw std::invalid_argument("matrix eigenvalue below admissible tolerance");
    if (vals(i) < 0.0) vals(i) = 0.0;
  }
  const double total = vals.sum();
  if (!(total > 1e-15)) throw std::runtime_error("matrix has vanishing trace");
  vals /= total;
  Matrix out = solver.eigenvectors() * vals.asDiagonal() * solver.eigenvectors().adjoint();
  out = 0.5 * (out + out.adjoint());
  return DensityMatrix(std::move(out));
}

}  // namespace

DensityMatrix DensityMatrix::projected(const Matrix& raw) {
  return clamp_spectrum(raw, -kEigenvalueTol);
}

DensityMatrix DensityMatrix::psd_clamped(const Matrix& raw) {
  return clamp_spectrum(raw, -std::numeric_limits<double>::infinity());
}

double DensityMatrix::purity() const {
  return (entries_ * entries_).trace().real();
}

std::vector<double> DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
  const auto& vals = solver.eigenvalues();
  return std::vector<double>(vals.data(), vals.data() + vals.size());
}

ObservableOperator::ObservableOperator(Matrix entries, std::string label)
    : entries_(std::move(entries)), label_(std::move(label)) {
  require(entries_.rows() == entries_.cols() && entries_.rows() > 0,
          "observable must be square and non-empty");
  require(entries_.allFinite(), "observable has non-finite entries");
  if (hermitian_deviation(entries_) > kHermitianTol)
    throw std::invalid_argument("observable is not Hermitian");
}

Projector::Projector(Matrix entries) : entries_(std::move(entries)) {
  require(entries_.rows() == entries_.cols() && entries_.rows() > 0,
          "projector must be square and non-empty");
  require(entries_.allFinite(), "projector has non-finite entries");
  if (hermitian_deviation(entries_) > kHermitianTol)
    throw std::invalid_argument("projector is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -kEigenvalueTol)
    throw std::invalid_argument("projector has a negative eigenvalue");
  if (solver.eigenvalues().maxCoeff() > 1.0 + kEigenvalueTol)
    throw std::invalid_argument("projector has an eigenvalue above 1");
}

Projector Projector::onto(const StateVector& psi) {
  Matrix m = psi.amplitudes() * psi.amplitudes().adjoint();
  return Projector(std::move(m), Trusted{});
}

Eigen::Matrix2cd pauli_matrix(char label) {
  const Complex i(0.0, 1.0);
  Eigen::Matrix2cd m;
  switch (label) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default:
      throw std::invalid_argument(std::string("unknown Pauli label '") + label + "'");
  }
  return m;
}

ObservableOperator pauli_string(const std::string& label) {
  require(!label.empty(), "Pauli string must be non-empty");
  Matrix acc = pauli_matrix(label[0]);
  for (std::size_t k = 1; k < label.size(); ++k)
    acc = tensor(acc, pauli_matrix(label[k]));
  return ObservableOperator(std::move(acc), label);
}

Matrix tensor(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  Vector v = Eigen::kroneckerProduct(a.amplitudes(), b.amplitudes()).eval();
  return StateVector(std::move(v));
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& subsystem_dims,
                            const std::vector<int>& keep) {
  const int n = static_cast<int>(subsystem_dims.size());
  require(n > 0, "subsystem dimensions must be non-empty");
  long total = 1;
  for (int d : subsystem_dims) {
    require(d >= 1, "subsystem dimensions must be positive");
    total *= d;
  }
  require(total == rho.dim(), "subsystem dimensions do not factor the state dimension");

  std::vector<int> kept(keep);
  std::sort(kept.begin(), kept.end());
  require(!kept.empty(), "must keep at least one subsystem");
  require(std::adjacent_find(kept.begin(), kept.end()) == kept.end(),
          "kept subsystems must be distinct");
  require(kept.front() >= 0 && kept.back() < n, "kept subsystem index out of range");

  std::vector<int> traced;
  for (int i = 0; i < n; ++i)
    if (!std::binary_search(kept.begin(), kept.end(), i)) traced.push_back(i);

  const std::vector<long> stride = index_strides(subsystem_dims);
  long kept_dim = 1;
  for (int i : kept) kept_dim *= subsystem_dims[i];
  long traced_dim = 1;
  for (int i : traced) traced_dim *= subsystem_dims[i];

  // Offset of each kept (traced) multi-index into the full basis index.
  auto offsets = [&](const std::vector<int>& subs, long count) {
    std::vector<long> out(count);
    for (long flat = 0; flat < count; ++flat) {
      long rem = flat, off = 0;
      for (int j = static_cast<int>(subs.size()) - 1; j >= 0; --j) {
        const int d = subsystem_dims[subs[j]];
        off += (rem % d) * stride[subs[j]];
        rem /= d;
      }
      out[flat] = off;
    }
    return out;
  };
  const std::vector<long> kept_off = offsets(kept, kept_dim);
  const std::vector<long> traced_off = offsets(traced, traced_dim);

  Matrix out = Matrix::Zero(kept_dim, kept_dim);
  const Matrix& m = rho.entries();
  for (long a = 0; a < kept_dim; ++a)
    for (long b = 0; b < kept_dim; ++b) {
      Complex acc = 0.0;
      for (long t = 0; t < traced_dim; ++t)
        acc += m(kept_off[a] + traced_off[t], kept_off[b] + traced_off[t]);
      out(a, b) = acc;
    }
  out = 0.5 * (out + out.adjoint());
  return DensityMatrix(std::move(out));
}

double born_probability(const DensityMatrix& rho, const Projector& projector) {
  require(rho.dim() == projector.dim(), "projector dimension does not match state");
  // Frobenius inner product; equals Tr(P rho) because P is Hermitian.
  const double p = (projector.entries().conjugate().cwiseProduct(rho.entries())).sum().real();
  return snap_unit_interval(p, kProbSnapTol, "Born probability");
}

double fidelity_pure(const DensityMatrix& rho, const StateVector& target) {
  require(rho.dim() == target.dim(), "target dimension does not match state");
  const double f = (target.amplitudes().adjoint() * rho.entries() * target.amplitudes())(0).real();
  return snap_unit_interval(f, kProbSnapTol, "fidelity");
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  require(a.dim() == b.dim(), "dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.entries() - b.entries(),
                                               Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double expectation_value(const DensityMatrix& rho, const ObservableOperator& obs) {
  require(rho.dim() == obs.dim(), "observable dimension does not match state");
  return (obs.entries().conjugate().cwiseProduct(rho.entries())).sum().real();
}

double entanglement_entropy(const DensityMatrix& rho,
                            const std::vector<int>& subsystem_dims,
                            const std::vector<int>& partition,
                            double log_base) {
  require(log_base > 1.0, "entropy log base must exceed 1");
  const DensityMatrix reduced = partial_trace(rho, subsystem_dims, partition);
  double entropy = 0.0;
  for (double lambda : reduced.eigenvalues()) {
    if (lambda < -kEigenvalueTol)
      throw std::runtime_error("reduced state has an inadmissible negative eigenvalue");
    if (lambda > 0.0) entropy -= lambda * std::log(lambda);
  }
  entropy /= std::log(log_base);
  return std::max(entropy, 0.0);
}

double mean_single_site_entropy(const DensityMatrix& rho,
                                const std::vector<int>& subsystem_dims) {
  double acc = 0.0;
  for (int site = 0; site < static_cast<int>(subsystem_dims.size()); ++site)
    acc += entanglement_entropy(rho, subsystem_dims, {site},
                                static_cast<double>(subsystem_dims[site]));
  return acc / static_cast<double>(subsystem_dims.size());
}

}  // namespace hyqsim
