#include "qsd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qsd/inconclusive_bounds.hpp"
#include "qsd/minerr_bounds.hpp"

namespace qsd {

namespace {

// Everything below works in the support basis of G (dimension r), with plain
// Eigen matrices for speed; results are lifted back at the end.

Matrix sym(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

// Eigenvalues at or below rel_cut * max |w| are treated as zero.
Matrix pseudo_inv_sqrt(const Matrix& s, double rel_cut) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success) throw NumericalError("oracle: eigensolver failed on S");
  const Eigen::VectorXd& w = es.eigenvalues();
  const double cut = rel_cut * w.cwiseAbs().maxCoeff();
  Eigen::VectorXd d(w.size());
  for (Index i = 0; i < w.size(); ++i) d(i) = w(i) > cut ? 1.0 / std::sqrt(w(i)) : 0.0;
  return sym(es.eigenvectors() * d.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint());
}

double max_eig(const Matrix& h) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(h, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

Matrix positive(const Matrix& h) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const Eigen::VectorXd v = es.eigenvalues().cwiseMax(0.0);
  return sym(es.eigenvectors() * v.asDiagonal() * es.eigenvectors().adjoint());
}

// Renormalizes so the elements sum to the identity; any deficit outside the
// support of the sum goes to element 0.
void complete(std::vector<Matrix>& povm, double eta) {
  const Index r = povm.front().rows();
  Matrix total = Matrix::Zero(r, r);
  for (const Matrix& e : povm) total += e;
  const Matrix id = Matrix::Identity(r, r);
  if ((total - id).cwiseAbs().maxCoeff() <= 1e-14) return;
  const Matrix root = pseudo_inv_sqrt(sym(total), eta);
  for (Matrix& e : povm) e = sym(root * e * root);
  povm[0] += sym(id - root * total * root);
}

struct InnerSolution {
  std::vector<Matrix> povm;  // complete POVM
  std::vector<Matrix> last;  // final raw iterate, for continuing the iteration
  Matrix z;                  // dual feasible: z >= states[k]
  double primal = 0.0;
  double dual = 0.0;
  int iterations = 0;

  double gap() const { return dual - primal; }
};

void certify(const std::vector<Matrix>& states, InnerSolution& s) {
  const Index r = states.front().rows();
  Matrix z0 = Matrix::Zero(r, r);
  s.primal = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const Matrix prod = states[k] * s.povm[k];
    z0 += prod;
    s.primal += prod.trace().real();
  }
  z0 = sym(z0);
  double shift = 0.0;
  for (const Matrix& rho : states) shift = std::max(shift, max_eig(rho - z0));
  s.z = z0 + shift * Matrix::Identity(r, r);
  s.dual = s.z.trace().real();

  // Second repair: Z <- Z + (rho_k - Z)_+ in turn. Each step keeps Z above
  // the earlier states, and the added mass sits only where violations are.
  Matrix z = z0;
  for (const Matrix& rho : states) z += positive(rho - z);
  const double t = z.trace().real();
  if (t < s.dual) {
    s.z = z;
    s.dual = t;
  }
}

// Fixed-point iteration Pi_k <- L rho_k Pi_k rho_k L, L = (sum_k rho_k Pi_k rho_k)^{-1/2}.
std::vector<Matrix> uniform_povm(Index r, std::size_t k) {
  return std::vector<Matrix>(k, Matrix::Identity(r, r) / static_cast<double>(k));
}

// Primal recovered from a near-optimal dual: each element lives on the
// near-kernel V_k of Z - rho_k, so Pi_k = V_k W_k V_k^dagger with the W_k
// fitted by least squares to sum_k Pi_k = I, clipped to PSD and completed.
std::vector<Matrix> round_from_dual(const std::vector<Matrix>& states, const Matrix& z, double delta, double eta) {
  const Index r = z.rows();
  std::vector<Matrix> bases;
  Index params = 0;
  for (const Matrix& rho : states) {
    const Eigen::SelfAdjointEigenSolver<Matrix> es(sym(z - rho));
    Index k = 0;
    while (k < r && es.eigenvalues()(k) <= delta) ++k;
    bases.push_back(es.eigenvectors().leftCols(k));
    params += k * k;
  }
  if (params == 0) return uniform_povm(r, states.size());

  // Real coordinates of a Hermitian k x k block: diagonal, then real and
  // imaginary parts above the diagonal.
  auto basis_element = [](Index k, Index idx) {
    Matrix e = Matrix::Zero(k, k);
    if (idx < k) {
      e(idx, idx) = 1.0;
      return e;
    }
    idx -= k;
    const bool imag = idx % 2 == 1;
    idx /= 2;
    Index i = 0;
    while (idx >= k - 1 - i) {
      idx -= k - 1 - i;
      ++i;
    }
    const Index j = i + 1 + idx;
    e(i, j) = imag ? Complex(0.0, 1.0) : Complex(1.0, 0.0);
    e(j, i) = std::conj(e(i, j));
    return e;
  };
  Eigen::MatrixXd a(2 * r * r, params);
  Eigen::VectorXd rhs(2 * r * r);
  const Matrix id = Matrix::Identity(r, r);
  for (Index i = 0; i < r * r; ++i) {
    rhs(i) = id.data()[i].real();
    rhs(r * r + i) = id.data()[i].imag();
  }
  Index col = 0;
  for (const Matrix& v : bases) {
    const Index k = v.cols();
    for (Index idx = 0; idx < k * k; ++idx, ++col) {
      const Matrix img = v * basis_element(k, idx) * v.adjoint();
      for (Index i = 0; i < r * r; ++i) {
        a(i, col) = img.data()[i].real();
        a(r * r + i, col) = img.data()[i].imag();
      }
    }
  }
  const Eigen::VectorXd x = a.completeOrthogonalDecomposition().solve(rhs);

  std::vector<Matrix> out;
  out.reserve(states.size());
  col = 0;
  for (const Matrix& v : bases) {
    const Index k = v.cols();
    Matrix w = Matrix::Zero(k, k);
    for (Index idx = 0; idx < k * k; ++idx, ++col) w += x(col) * basis_element(k, idx);
    out.push_back(k == 0 ? Matrix::Zero(r, r) : sym(v * positive(sym(w)) * v.adjoint()));
  }
  complete(out, eta);
  return out;
}

InnerSolution fixed_point(const std::vector<Matrix>& states, std::vector<Matrix> povm, double tol, int max_iters,
                          double eta, bool polish = true);

// Tries candidates built from the best dual. Rounding recovers the primal;
// elements whose dual slack clearly exceeds the gap vanish at the optimum but
// decay slowly under the iteration, so a short run with them removed may
// certify a tighter dual. That run replaces the iterate when it does.
int polish(const std::vector<Matrix>& states, std::vector<Matrix>& povm, InnerSolution& best, double tol, double eta) {
  for (double f : {1e-2, 1e-1, 1.0, 1e1, 1e2}) {
    InnerSolution cand;
    cand.povm = round_from_dual(states, best.z, f * best.gap(), eta);
    certify(states, cand);
    if (best.dual < cand.dual) {
      cand.dual = best.dual;
      cand.z = best.z;
    }
    if (cand.gap() < best.gap()) best = std::move(cand);
  }

  constexpr int kTrialIters = 500;
  std::vector<Matrix> trial = povm;
  bool pruned = false;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const Matrix slack = sym(best.z - states[k]);
    const double low = Eigen::SelfAdjointEigenSolver<Matrix>(slack, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    if (low > best.gap() && trial[k].cwiseAbs().maxCoeff() > 0.0) {
      trial[k].setZero();
      pruned = true;
    }
  }
  if (!pruned) return 0;
  complete(trial, eta);
  InnerSolution run = fixed_point(states, std::move(trial), tol, kTrialIters, eta, false);
  const int used = run.iterations;
  if (run.gap() < best.gap()) {
    povm = std::move(run.last);
    best = std::move(run);
  }
  return used;
}

InnerSolution fixed_point(const std::vector<Matrix>& states, std::vector<Matrix> povm, double tol, int max_iters,
                          double eta, bool polish_steps) {
  constexpr int kCheckEvery = 10;
  constexpr int kPolishEvery = 500;
  InnerSolution best;
  best.dual = std::numeric_limits<double>::infinity();
  const Index r = states.front().rows();
  int it = 0;
  int extra = 0;
  for (;; ++it) {
    if (it % kCheckEvery == 0 || it == max_iters) {
      InnerSolution cand;
      cand.povm = povm;
      complete(cand.povm, eta);
      certify(states, cand);
      if (cand.gap() < best.gap() || !std::isfinite(best.dual)) best = std::move(cand);
      if (polish_steps && best.gap() > tol && it > 0 && it % kPolishEvery == 0)
        extra += polish(states, povm, best, tol, eta);
      if (best.gap() <= tol || it >= max_iters) break;
    }
    Matrix s = Matrix::Zero(r, r);
    for (std::size_t k = 0; k < states.size(); ++k) s += states[k] * povm[k] * states[k];
    // A loose cut here drops directions where one element is still small,
    // and the iteration can never restore them.
    const Matrix l = pseudo_inv_sqrt(sym(s), 1e-14);
    for (std::size_t k = 0; k < states.size(); ++k) povm[k] = sym(l * states[k] * povm[k] * states[k] * l);
  }
  best.iterations = it + extra;
  best.last = std::move(povm);
  return best;
}

Povm lift_povm(const SupportBasis& support, const std::vector<Matrix>& povm, bool inconclusive) {
  std::vector<HermitianOperator> out;
  out.reserve(povm.size());
  for (const Matrix& e : povm) out.push_back(support.lift(HermitianOperator::symmetrized(e)));
  if (!support.full_rank()) out[0] += support.kernel_projector();
  return Povm(std::move(out), inconclusive);
}

struct Compressed {
  SupportBasis support;
  std::vector<Matrix> states;
  Matrix gram;
};

Compressed compress(const StateSet& set, double eta) {
  const HermitianOperator g = gram(set);
  Compressed c{SupportBasis(g, eta), {}, {}};
  for (const HermitianOperator& rho : set.weighted_states()) c.states.push_back(c.support.compress(rho).matrix());
  c.gram = c.support.compress(g).matrix();
  return c;
}

std::string describe(const char* what, const OracleCertificate& cert, double tol) {
  std::ostringstream os;
  os.precision(12);
  os << what << " did not reach gap " << tol << ": primal " << cert.primal_value << ", dual " << cert.dual_value
     << ", gap " << cert.gap << " after " << cert.iterations << " iterations";
  return os.str();
}

}  // namespace

OracleCertificate minerr_oracle(const StateSet& set, const OracleOptions& options) {
  const Compressed c = compress(set, options.eta);
  const Index r = c.support.rank();
  InnerSolution sol = fixed_point(c.states, uniform_povm(r, c.states.size()), options.tol, options.max_iters, options.eta);

  OracleCertificate cert;
  cert.povm = lift_povm(c.support, sol.povm, false);
  cert.dual_operator = c.support.lift(HermitianOperator::symmetrized(sol.z));
  cert.primal_value = sol.primal;
  cert.dual_value = sol.dual;
  cert.gap = sol.gap();
  cert.iterations = sol.iterations;
  if (cert.gap > options.tol) throw OracleNotConverged(describe("minerr_oracle", cert, options.tol), cert);
  return cert;
}

OracleCertificate inc_oracle(const StateSet& set, double p, const OracleOptions& options) {
  if (!(p >= 0.0 && p <= 1.0)) throw ContractError("inc_oracle: p must lie in [0, 1]");
  const Compressed c = compress(set, options.eta);
  const Index r = c.support.rank();
  const std::size_t m_count = c.states.size();

  // Any complete (M + 1)-outcome POVM with success pc and rate pi gives the
  // affine minorant pc + a (pi - p) of f(a) = Tr Z(a) - a p, where Tr Z(a) is
  // the optimum of the augmented minimum-error problem at a. The best mixture
  // of two candidates with P_I = p attains the minimum of the upper envelope
  // of these lines, so each new candidate tightens the primal and the next a
  // to try is where the envelope bottoms out.
  struct Candidate {
    std::vector<Matrix> povm;
    double pc = 0.0;
    double pi = 0.0;
  };
  std::vector<Candidate> cands;
  struct Pair {
    double value = -std::numeric_limits<double>::infinity();
    std::size_t lo = 0;
    std::size_t hi = 0;
    double w = 1.0;  // weight of cands[lo]
  } best;
  auto consider = [&](std::size_t i, std::size_t j) {
    if (cands[i].pi > p || cands[j].pi < p) return;
    const double span = cands[j].pi - cands[i].pi;
    const double w = span <= 0.0 ? 1.0 : (cands[j].pi - p) / span;
    const double v = w * cands[i].pc + (1.0 - w) * cands[j].pc;
    if (v > best.value) best = {v, i, j, w};
  };
  auto add_candidate = [&](Candidate cd) {
    cands.push_back(std::move(cd));
    const std::size_t n = cands.size() - 1;
    for (std::size_t i = 0; i <= n; ++i) {
      consider(i, n);
      consider(n, i);
    }
  };
  auto envelope = [&](double a) {
    double v = -std::numeric_limits<double>::infinity();
    for (const Candidate& cd : cands) v = std::max(v, cd.pc + a * (cd.pi - p));
    return v;
  };

  {
    Candidate all;
    all.povm.assign(m_count + 1, Matrix::Zero(r, r));
    all.povm[m_count] = Matrix::Identity(r, r);
    all.pi = 1.0;
    add_candidate(std::move(all));
  }

  double dual = std::numeric_limits<double>::infinity();
  Matrix dual_z;
  double dual_a = 0.0;
  int total_iterations = 0;
  std::vector<std::pair<double, std::vector<Matrix>>> solved;  // warm starts by a

  // For fixed a the augmented problem over {rho_m, aG} is solved on the
  // normalized set {c rho_m, c aG}, c = 1 / (1 + a). Each solve contributes a
  // dual value and two candidates: its own POVM and the variant with the
  // inconclusive element folded into the likeliest conclusive outcome.
  auto record = [&](double a, double scale, const InnerSolution& sol) {
    const Matrix z = sol.z / scale;
    const double f = z.trace().real() - a * p;
    if (f < dual) {
      dual = f;
      dual_z = z;
      dual_a = a;
    }

    Candidate own;
    for (std::size_t k = 0; k < m_count; ++k) own.pc += (c.states[k] * sol.povm[k]).trace().real();
    own.pi = (c.gram * sol.povm[m_count]).trace().real();
    own.povm = sol.povm;
    std::size_t target = 0;
    double gain = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m_count; ++k) {
      const double g = (c.states[k] * sol.povm[m_count]).trace().real();
      if (g > gain) {
        gain = g;
        target = k;
      }
    }
    Candidate folded;
    folded.povm = sol.povm;
    folded.povm[target] += folded.povm[m_count];
    folded.povm[m_count].setZero();
    folded.pc = own.pc + gain;
    add_candidate(std::move(own));
    add_candidate(std::move(folded));
  };

  // Warm starts can carry elements that have collapsed to zero, which the
  // multiplicative update never regrows; a warm solve that misses its
  // tolerance is retried once from the uniform POVM; later visits to the
  // same a continue whichever run got further.
  auto evaluate = [&](double a, double inner_tol) {
    std::vector<Matrix> warm;
    bool same = false;
    std::size_t slot = solved.size();
    if (solved.empty()) {
      warm = uniform_povm(r, m_count + 1);
    } else {
      const auto near = std::min_element(solved.begin(), solved.end(), [a](const auto& x, const auto& y) {
        return std::abs(x.first - a) < std::abs(y.first - a);
      });
      warm = near->second;
      same = near->first == a;
      if (same) slot = static_cast<std::size_t>(near - solved.begin());
    }
    if (!same) {
      const Matrix mix = Matrix::Identity(r, r) / static_cast<double>(m_count + 1);
      for (Matrix& e : warm) e = (1.0 - 1e-4) * e + 1e-4 * mix;
    }

    const double scale = 1.0 / (1.0 + a);
    std::vector<Matrix> states;
    states.reserve(m_count + 1);
    for (const Matrix& rho : c.states) states.push_back(scale * rho);
    states.push_back(scale * a * c.gram);
    const bool cold = solved.empty();
    InnerSolution sol = fixed_point(states, std::move(warm), scale * inner_tol, options.max_iters, options.eta);
    total_iterations += sol.iterations;
    record(a, scale, sol);
    if (!cold && !same && sol.gap() > scale * inner_tol) {
      InnerSolution fresh =
          fixed_point(states, uniform_povm(r, m_count + 1), scale * inner_tol, options.max_iters, options.eta);
      total_iterations += fresh.iterations;
      record(a, scale, fresh);
      if (fresh.gap() < sol.gap()) sol = std::move(fresh);
    }
    if (same)
      solved[slot].second = std::move(sol.last);
    else
      solved.emplace_back(a, std::move(sol.last));
  };

  // Minimizer of the envelope on [0, top]: the crossing of the best pair, or
  // a golden-section search when that pair is flat.
  const double top = whitened_extremes(set, pcup(set).iterates.last(), options.eta).second + 1.0;
  auto next_point = [&] {
    const Candidate& l = cands[best.lo];
    const Candidate& h = cands[best.hi];
    const double sl = l.pi - p;
    const double sh = h.pi - p;
    if (sh - sl > 1e-15) return std::clamp((l.pc - h.pc) / (sh - sl), 0.0, top);
    double lo = 0.0;
    double hi = top;
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    while (hi - lo > 1e-12 * (1.0 + top)) {
      const double x1 = hi - ratio * (hi - lo);
      const double x2 = lo + ratio * (hi - lo);
      (envelope(x1) <= envelope(x2) ? hi : lo) = envelope(x1) <= envelope(x2) ? x2 : x1;
    }
    return 0.5 * (lo + hi);
  };

  // When a new cut does not shrink the gap, the slack is on the dual side:
  // re-solve at the best dual point with a tighter inner tolerance.
  constexpr int kMaxEvaluations = 200;
  auto gap = [&] { return dual - best.value; };
  auto inner_tol = [&] {
    const double g = gap();
    return std::isfinite(g) ? std::max(0.1 * options.tol, std::min(1e-3, 0.1 * g)) : 1e-3;
  };
  for (int n = 0; n < kMaxEvaluations && gap() > options.tol; ++n) {
    const double before = gap();
    const double a = next_point();
    evaluate(a, inner_tol());
    if (gap() > 0.9 * before && gap() > options.tol && dual_a != a) {
      evaluate(dual_a, inner_tol());
      ++n;
    }
  }

  std::vector<Matrix> primal = cands[best.lo].povm;
  const std::vector<Matrix>& other = cands[best.hi].povm;
  for (std::size_t k = 0; k <= m_count; ++k) primal[k] = sym(best.w * primal[k] + (1.0 - best.w) * other[k]);

  OracleCertificate cert;
  cert.povm = lift_povm(c.support, primal, true);
  cert.dual_operator = c.support.lift(HermitianOperator::symmetrized(dual_z));
  cert.dual_scalar = dual_a;
  cert.primal_value = probabilities(set, cert.povm).success;
  cert.dual_value = dual;
  cert.gap = cert.dual_value - cert.primal_value;
  cert.iterations = total_iterations;
  if (cert.gap > options.tol) throw OracleNotConverged(describe("inc_oracle", cert, options.tol), cert);
  return cert;
}

CertificateCheck recheck_certificate(const StateSet& set, const OracleCertificate& cert, double p) {
  CertificateCheck out;
  const Probabilities probs = probabilities(set, cert.povm);
  out.primal_value = probs.success;
  out.inconclusive = probs.inconclusive;
  out.dual_value = cert.dual_operator.trace() - cert.dual_scalar * p;

  const Diagnostics d = cert.povm.validate(0.0);
  for (const Check& ch : d.checks) {
    const double v = ch.name == "completeness" ? ch.magnitude : -ch.magnitude;
    out.povm_violation = std::max(out.povm_violation, v);
  }
  for (const HermitianOperator& rho : set.weighted_states()) {
    out.dual_violation = std::max(out.dual_violation, -lambda_min(cert.dual_operator - rho));
  }
  out.dual_violation = std::max(out.dual_violation, -lambda_min(cert.dual_operator - cert.dual_scalar * gram(set)));
  return out;
}

}  // namespace qsd
