// Dense linear-algebra core for small multi-qubit systems: validated state
// vectors and density matrices, Pauli observables, projectors, tensor
// products, partial traces, Born probabilities and entropy measures.
#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hyqsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Shared numerical tolerances.
inline constexpr double kNormTol = 1e-10;        // state-vector norm deviation
inline constexpr double kHermitianTol = 1e-10;   // max |M - M^dag| entry
inline constexpr double kEigenvalueTol = 1e-10;  // admissible negative eigenvalue magnitude
inline constexpr double kTraceTol = 1e-10;       // trace deviation from 1
inline constexpr double kProbSnapTol = 1e-12;    // snap-to-[0,1] window for probabilities

// Pure state of arbitrary finite dimension. The amplitude vector has unit
// Euclidean norm within kNormTol; construction rejects anything else.
class StateVector {
 public:
  explicit StateVector(Vector amplitudes);

  // Rescales to unit norm; rejects vectors with norm below 1e-15.
  static StateVector normalized(Vector amplitudes);

  int dim() const { return static_cast<int>(amps_.size()); }
  const Vector& amplitudes() const { return amps_; }
  Complex amplitude(int index) const;

 private:
  Vector amps_;
};

// Trace-one Hermitian positive-semidefinite matrix. Construction enforces
// hermiticity within kHermitianTol, eigenvalues >= -kEigenvalueTol and
// trace 1 within kTraceTol.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix entries);

  static DensityMatrix from_pure(const StateVector& psi);
  static DensityMatrix maximally_mixed(int dim);

  // Hermitizes, clamps eigenvalues in [-kEigenvalueTol, 0) to zero and
  // renormalizes the trace. Eigenvalues below -kEigenvalueTol are rejected.
  static DensityMatrix projected(const Matrix& raw);

  // Hermitizes, clamps *all* negative eigenvalues to zero and renormalizes.
  // For raw matrices that may sit far outside the physical cone.
  static DensityMatrix psd_clamped(const Matrix& raw);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  double purity() const;
  std::vector<double> eigenvalues() const;  // ascending

 private:
  struct Trusted {};
  DensityMatrix(Matrix entries, Trusted) : entries_(std::move(entries)) {}
  Matrix entries_;
};

// Hermitian operator with an optional human-readable label.
class ObservableOperator {
 public:
  explicit ObservableOperator(Matrix entries, std::string label = "");

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  const std::string& label() const { return label_; }

 private:
  Matrix entries_;
  std::string label_;
};

// Hermitian PSD operator with eigenvalues at most 1 (POVM element / projector).
class Projector {
 public:
  explicit Projector(Matrix entries);

  // Rank-1 projector |psi><psi|; skips the spectral check since the form
  // guarantees it.
  static Projector onto(const StateVector& psi);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }

 private:
  struct Trusted {};
  Projector(Matrix entries, Trusted) : entries_(std::move(entries)) {}
  Matrix entries_;
};

// Single-qubit Pauli matrix for 'I', 'X', 'Y' or 'Z'.
Eigen::Matrix2cd pauli_matrix(char label);

// Tensor product of single-qubit Paulis, e.g. "XZ" or "XYIZ". The first
// character acts on the most significant qubit.
ObservableOperator pauli_string(const std::string& label);

// Kronecker products; the first operand occupies the most significant index.
Matrix tensor(const Matrix& a, const Matrix& b);
StateVector tensor(const StateVector& a, const StateVector& b);

// Reduced state over the kept subsystems (ascending order of `keep`).
// `subsystem_dims` lists local dimensions from most to least significant.
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& subsystem_dims,
                            const std::vector<int>& keep);

// Tr(P rho); snapped into [0,1] when within kProbSnapTol of the boundary,
// rejected beyond that (indicates an operand violating its invariants).
double born_probability(const DensityMatrix& rho, const Projector& projector);

// <target| rho |target>, snapped into [0,1] like born_probability.
double fidelity_pure(const DensityMatrix& rho, const StateVector& target);

// Half the trace norm of (a - b).
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

double expectation_value(const DensityMatrix& rho, const ObservableOperator& obs);

// Von Neumann entropy of the reduced state on `partition`, in units of
// log `log_base` (2 for qubit bipartitions, 4 for ququart bipartitions).
// Uses 0 log 0 = 0; reduced eigenvalues below -kEigenvalueTol are rejected.
double entanglement_entropy(const DensityMatrix& rho,
                            const std::vector<int>& subsystem_dims,
                            const std::vector<int>& partition,
                            double log_base);

// Average over all single-site-vs-rest bipartitions, each in log base equal
// to the local dimension. Equals 1 exactly when every site is maximally
// entangled with the rest.
double mean_single_site_entropy(const DensityMatrix& rho,
                                const std::vector<int>& subsystem_dims);

}  // namespace hyqsim
