#pragma once

// Dense complex Hermitian matrix calculus: eigendecomposition and the spectral
// functions (positive part, support projectors, inverse square root) built on it.

#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace qsd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

// Relative eigenvalue threshold. An eigenvalue counts as positive iff
// lambda > eta * s and as nonnegative iff lambda >= -eta * s, where
// s = max(1, spectral radius).
inline constexpr double kDefaultEta = 1e-9;

class HermitianOperator {
 public:
  HermitianOperator() = default;

  static HermitianOperator zero(Index dim);
  static HermitianOperator identity(Index dim);
  static HermitianOperator diagonal(const Eigen::VectorXd& values);
  // Outer product |v><v|.
  static HermitianOperator projector_onto(const Eigen::VectorXcd& v);

  // Rejects input that is not Hermitian within 1e-12 * (1 + max |entry|).
  static HermitianOperator from_matrix(const Matrix& m);
  // Returns (m + m^dagger) / 2; any square input is accepted.
  static HermitianOperator symmetrized(const Matrix& m);

  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  Complex operator()(Index i, Index j) const { return m_(i, j); }

  double trace() const { return m_.trace().real(); }
  double frobenius_norm() const { return m_.norm(); }
  // Re Tr(this * other), exact for Hermitian pairs.
  double trace_product(const HermitianOperator& other) const;
  // c * this * c^dagger; c may be rectangular.
  HermitianOperator congruence(const Matrix& c) const;

  HermitianOperator& operator+=(const HermitianOperator& o);
  HermitianOperator& operator-=(const HermitianOperator& o);
  HermitianOperator& operator*=(double s);

  friend HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
  friend HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
  friend HermitianOperator operator*(HermitianOperator a, double s) { return a *= s; }
  friend HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }
  friend HermitianOperator operator-(HermitianOperator a) { return a *= -1.0; }

 private:
  explicit HermitianOperator(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

struct SpectralDecomposition {
  Eigen::VectorXd values;  // descending
  Matrix vectors;          // orthonormal columns, vectors.col(n) pairs with values(n)

  double spectral_radius() const;
  // max(1, spectral radius): the scale against which eta is applied.
  double threshold_scale() const;
};

// Throws NumericalError (with the residual norm) if the solver does not converge.
SpectralDecomposition eig_hermitian(const HermitianOperator& a);

HermitianOperator positive_part(const HermitianOperator& a);
HermitianOperator positive_part(const SpectralDecomposition& eig);

// Projector onto the span of eigenvectors with eigenvalue > eta * s.
HermitianOperator proj_pos(const HermitianOperator& a, double eta = kDefaultEta);
// Projector onto the span of eigenvectors with eigenvalue >= -eta * s.
HermitianOperator proj_nonneg(const HermitianOperator& a, double eta = kDefaultEta);
HermitianOperator proj_pos(const SpectralDecomposition& eig, double eta = kDefaultEta);
HermitianOperator proj_nonneg(const SpectralDecomposition& eig, double eta = kDefaultEta);

struct InvSqrtResult {
  HermitianOperator op;
  Index rank = 0;
  bool rank_deficient = false;
};

// Pseudo inverse square root: kernel directions (eigenvalue <= eta * s) map to zero.
InvSqrtResult inv_sqrt_psd(const HermitianOperator& g, double eta = kDefaultEta);

// (lambda_min, lambda_max)
std::pair<double, double> extreme_eigs(const HermitianOperator& a);
double lambda_min(const HermitianOperator& a);
double lambda_max(const HermitianOperator& a);

// True iff supp(a) lies in supp(b), tested as ||(I - P>(b)) P>(a)|| <= eta.
bool support_subset(const HermitianOperator& a, const HermitianOperator& b, double eta = kDefaultEta);

// Orthonormal basis of the support of a PSD operator. Used to restrict problems
// to the state space spanned by the Gram operator.
class SupportBasis {
 public:
  explicit SupportBasis(const HermitianOperator& psd, double eta = kDefaultEta);

  Index ambient_dim() const noexcept { return basis_.rows(); }
  Index rank() const noexcept { return basis_.cols(); }
  bool full_rank() const noexcept { return rank() == ambient_dim(); }
  const Matrix& basis() const noexcept { return basis_; }
  // Eigenvalues of the defining operator on its support, descending.
  const Eigen::VectorXd& support_values() const noexcept { return values_; }

  HermitianOperator compress(const HermitianOperator& a) const;  // V^dagger a V
  HermitianOperator lift(const HermitianOperator& a) const;      // V a V^dagger
  // I - V V^dagger
  HermitianOperator kernel_projector() const;

 private:
  Matrix basis_;
  Eigen::VectorXd values_;
};

}  // namespace qsd
