#include "qsd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qsd/errors.hpp"

namespace qsd {

HermitianOperator HermitianOperator::zero(Index dim) { return HermitianOperator(Matrix::Zero(dim, dim)); }

HermitianOperator HermitianOperator::identity(Index dim) {
  return HermitianOperator(Matrix::Identity(dim, dim));
}

HermitianOperator HermitianOperator::diagonal(const Eigen::VectorXd& values) {
  Matrix m = Matrix::Zero(values.size(), values.size());
  m.diagonal() = values.cast<Complex>();
  return HermitianOperator(std::move(m));
}

HermitianOperator HermitianOperator::projector_onto(const Eigen::VectorXcd& v) {
  return symmetrized(v * v.adjoint());
}

HermitianOperator HermitianOperator::from_matrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw InputError("Hermitian operator must be square, got " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()));
  }
  const double scale = m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
  const double deviation = m.size() == 0 ? 0.0 : (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (deviation > 1e-12 * (1.0 + scale)) {
    std::ostringstream os;
    os << "matrix is not Hermitian (max |A - A^dagger| = " << deviation << ")";
    throw InputError(os.str());
  }
  return symmetrized(m);
}

HermitianOperator HermitianOperator::symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) throw InputError("Hermitian operator must be square");
  Matrix s = 0.5 * (m + m.adjoint());
  return HermitianOperator(std::move(s));
}

double HermitianOperator::trace_product(const HermitianOperator& other) const {
  // Tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B.
  return (m_.array() * other.m_.array().conjugate()).sum().real();
}

HermitianOperator HermitianOperator::congruence(const Matrix& c) const {
  return symmetrized(c * m_ * c.adjoint());
}

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& o) {
  m_ += o.m_;
  return *this;
}

HermitianOperator& HermitianOperator::operator-=(const HermitianOperator& o) {
  m_ -= o.m_;
  return *this;
}

HermitianOperator& HermitianOperator::operator*=(double s) {
  m_ *= s;
  return *this;
}

double SpectralDecomposition::spectral_radius() const {
  if (values.size() == 0) return 0.0;
  return std::max(std::abs(values(0)), std::abs(values(values.size() - 1)));
}

double SpectralDecomposition::threshold_scale() const { return std::max(1.0, spectral_radius()); }

SpectralDecomposition eig_hermitian(const HermitianOperator& a) {
  const Index n = a.dim();
  SpectralDecomposition out;
  if (n == 0) return out;

  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    // Best-effort residual of whatever the solver produced.
    const Matrix& v = solver.eigenvectors();
    const Eigen::VectorXd& w = solver.eigenvalues();
    double residual = 0.0;
    if (v.rows() == n && w.size() == n) {
      residual = (a.matrix() * v - v * w.cast<Complex>().asDiagonal()).norm();
    }
    std::ostringstream os;
    os << "Hermitian eigensolver did not converge (n = " << n << ", residual norm " << residual << ")";
    throw NumericalError(os.str());
  }
  // Eigen sorts ascending.
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

namespace {

// Sum of w(lambda_n) v_n v_n^dagger over the selected eigenpairs.
template <typename Weight>
HermitianOperator spectral_sum(const SpectralDecomposition& eig, Weight weight) {
  const Index n = eig.vectors.rows();
  Eigen::VectorXd w(eig.values.size());
  Index kept = 0;
  for (Index k = 0; k < eig.values.size(); ++k) {
    w(k) = weight(eig.values(k));
    if (w(k) != 0.0) ++kept;
  }
  if (kept == 0) return HermitianOperator::zero(n);
  Matrix cols(n, kept);
  Eigen::VectorXd wk(kept);
  for (Index k = 0, j = 0; k < eig.values.size(); ++k) {
    if (w(k) == 0.0) continue;
    cols.col(j) = eig.vectors.col(k);
    wk(j++) = w(k);
  }
  return HermitianOperator::symmetrized(cols * wk.cast<Complex>().asDiagonal() * cols.adjoint());
}

}  // namespace

HermitianOperator positive_part(const SpectralDecomposition& eig) {
  return spectral_sum(eig, [](double l) { return l > 0.0 ? l : 0.0; });
}

HermitianOperator positive_part(const HermitianOperator& a) { return positive_part(eig_hermitian(a)); }

HermitianOperator proj_pos(const SpectralDecomposition& eig, double eta) {
  const double cut = eta * eig.threshold_scale();
  return spectral_sum(eig, [cut](double l) { return l > cut ? 1.0 : 0.0; });
}

HermitianOperator proj_nonneg(const SpectralDecomposition& eig, double eta) {
  const double cut = -eta * eig.threshold_scale();
  return spectral_sum(eig, [cut](double l) { return l >= cut ? 1.0 : 0.0; });
}

HermitianOperator proj_pos(const HermitianOperator& a, double eta) { return proj_pos(eig_hermitian(a), eta); }

HermitianOperator proj_nonneg(const HermitianOperator& a, double eta) {
  return proj_nonneg(eig_hermitian(a), eta);
}

InvSqrtResult inv_sqrt_psd(const HermitianOperator& g, double eta) {
  const SpectralDecomposition eig = eig_hermitian(g);
  const double cut = eta * eig.threshold_scale();
  InvSqrtResult out;
  out.op = spectral_sum(eig, [cut](double l) { return l > cut ? 1.0 / std::sqrt(l) : 0.0; });
  out.rank = (eig.values.array() > cut).count();
  out.rank_deficient = out.rank < g.dim();
  return out;
}

std::pair<double, double> extreme_eigs(const HermitianOperator& a) {
  if (a.dim() == 0) return {0.0, 0.0};
  const Eigen::VectorXd w = Eigen::SelfAdjointEigenSolver<Matrix>(a.matrix(), Eigen::EigenvaluesOnly).eigenvalues();
  return {w(0), w(w.size() - 1)};
}

double lambda_min(const HermitianOperator& a) { return extreme_eigs(a).first; }
double lambda_max(const HermitianOperator& a) { return extreme_eigs(a).second; }

bool support_subset(const HermitianOperator& a, const HermitianOperator& b, double eta) {
  const HermitianOperator pa = proj_pos(a, eta);
  const HermitianOperator pb = proj_pos(b, eta);
  const Matrix residual = (Matrix::Identity(a.dim(), a.dim()) - pb.matrix()) * pa.matrix();
  // Operator 2-norm.
  const double norm = residual.size() == 0 ? 0.0 : Eigen::JacobiSVD<Matrix>(residual).singularValues()(0);
  return norm <= eta;
}

SupportBasis::SupportBasis(const HermitianOperator& psd, double eta) {
  const SpectralDecomposition eig = eig_hermitian(psd);
  const double cut = eta * eig.threshold_scale();
  const Index r = (eig.values.array() > cut).count();
  // Eigenvalues are descending, so the support is the leading block.
  basis_ = eig.vectors.leftCols(r);
  values_ = eig.values.head(r);
}

HermitianOperator SupportBasis::compress(const HermitianOperator& a) const {
  return a.congruence(basis_.adjoint());
}

HermitianOperator SupportBasis::lift(const HermitianOperator& a) const { return a.congruence(basis_); }

HermitianOperator SupportBasis::kernel_projector() const {
  const Index n = ambient_dim();
  return HermitianOperator::symmetrized(Matrix::Identity(n, n) - basis_ * basis_.adjoint());
}

}  // namespace qsd
