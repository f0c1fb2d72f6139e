#include "qsd/inconclusive_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qsd/errors.hpp"

namespace qsd {

namespace {

void require_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << "inconclusive probability must lie in [0, 1], got " << p;
    throw ContractError(os.str());
  }
}

void require_dual_feasible(const StateSet& set, const HermitianOperator& x) {
  if (x.dim() != set.dim()) throw ContractError("X has the wrong dimension");
  for (std::size_t m = 0; m < set.size(); ++m) {
    const double lmin = lambda_min(x - set.weighted(m));
    if (lmin < -1e-9) {
      std::ostringstream os;
      os << "X is not dual feasible: lambda_min(X - rho_" << m << ") = " << lmin;
      throw ContractError(os.str());
    }
  }
}

double s_unchecked(const HermitianOperator& x, const HermitianOperator& g, double a, double p) {
  return x.trace() + positive_part(a * g - x).trace() - a * p;
}

RateValues tau_unchecked(const HermitianOperator& x, const HermitianOperator& g, double a, double eta) {
  const SpectralDecomposition eig = eig_hermitian(a * g - x);
  return {g.trace_product(proj_pos(eig, eta)), g.trace_product(proj_nonneg(eig, eta))};
}

}  // namespace

double s_of_a(const StateSet& set, const HermitianOperator& x_sopt, double a, double p) {
  require_dual_feasible(set, x_sopt);
  if (a < 0.0) throw ContractError("s(a) requires a >= 0");
  return s_unchecked(x_sopt, gram(set), a, p);
}

RateValues tau(const StateSet& set, const HermitianOperator& x_sopt, double a, double eta) {
  return tau_unchecked(x_sopt, gram(set), a, eta);
}

std::pair<double, double> whitened_extremes(const StateSet& set, const HermitianOperator& x_sopt, double eta) {
  const SupportBasis support(gram(set), eta);
  const Eigen::VectorXd inv_root = support.support_values().cwiseSqrt().cwiseInverse();
  const Matrix whiten = inv_root.cast<Complex>().asDiagonal() * support.basis().adjoint();
  return extreme_eigs(x_sopt.congruence(whiten));
}

double default_epsilon(const StateSet& set, const HermitianOperator& x_sopt, double eta) {
  const SupportBasis support(gram(set), eta);
  const double g_max = support.support_values()(0);
  const double g_min = support.support_values()(support.rank() - 1);
  const double w_max = whitened_extremes(set, x_sopt, eta).second;
  const double x_max = lambda_max(x_sopt);

  // a_R G - X >= eps G, so its eigenvalues on supp G are at least eps * g_min;
  // keep that an order of magnitude above the classification threshold.
  double eps = 1e-6 * std::max(1.0, w_max);
  for (int pass = 0; pass < 2; ++pass) {
    const double scale = std::max(1.0, (w_max + eps) * g_max + x_max);
    eps = std::max(eps, 10.0 * eta * scale / g_min);
  }
  return eps;
}

BracketSearch bracket_search(const StateSet& set, const HermitianOperator& x_sopt, const IncParams& params) {
  require_probability(params.p);
  if (params.iterations < 0) throw ContractError("iteration count must be nonnegative");
  require_dual_feasible(set, x_sopt);
  const HermitianOperator g = gram(set);
  const double p = params.p;

  BracketSearch out;
  out.epsilon = params.epsilon.value_or(default_epsilon(set, x_sopt, params.eta));
  if (!(out.epsilon > 0.0)) throw ContractError("bracket padding epsilon must be positive");
  out.value = 1.0 - p;

  auto evaluate = [&](double a) {
    const RateValues t = tau_unchecked(x_sopt, g, a, params.eta);
    const SEvaluation e{a, s_unchecked(x_sopt, g, a, p), t.tau, t.tau_plus};
    out.evaluations.push_back(e);
    out.value = std::min(out.value, e.s);
    return e;
  };

  const auto [w_min, w_max] = whitened_extremes(set, x_sopt, params.eta);
  const SEvaluation left = evaluate(w_min);
  const SEvaluation right = evaluate(w_max + out.epsilon);
  BracketState b{left.a, right.a, left.tau, right.tau};
  out.history.push_back(b);

  for (int j = 0; j < params.iterations; ++j) {
    const double denom = b.tau_right - b.tau_left;
    const double a = std::abs(denom) < 1e-12
                         ? 0.5 * (b.a_left + b.a_right)
                         : ((b.tau_right - p) * b.a_left + (p - b.tau_left) * b.a_right) / denom;
    const SEvaluation e = evaluate(a);
    if (e.tau <= p) {
      b.a_left = a;
      b.tau_left = e.tau;
    } else {
      b.a_right = a;
      b.tau_right = e.tau;
    }
    out.history.push_back(b);
  }
  out.bracket = b;
  return out;
}

Povm pi_a_povm(const StateSet& set, const DualIterate& iterates, double a, double eta) {
  if (iterates.size() != set.size()) throw ContractError("pi_a_povm: iterates do not match the state set");
  if (a < 0.0) throw ContractError("pi_a_povm requires a >= 0");
  std::vector<HermitianOperator> residuals;
  residuals.reserve(set.size());
  for (std::size_t m = 1; m < set.size(); ++m) residuals.push_back(iterates.x[m - 1] - set.weighted(m));
  residuals.push_back(iterates.last() - a * gram(set));
  Povm povm = build_staircase(residuals, true, eta).povm;
  povm.require_valid(1e-9, "pi_a_povm");
  return povm;
}

IncLowerBound pclip(const StateSet& set, const DualIterate& iterates, double p, double a_left, double a_right,
                    double eta) {
  require_probability(p);
  const Povm left = pi_a_povm(set, iterates, a_left, eta);
  const Povm right = pi_a_povm(set, iterates, a_right, eta);
  // The inconclusive probability of Pi^(a) is tau(a).
  const double tau_l = probabilities(set, left).inconclusive;
  const double tau_r = probabilities(set, right).inconclusive;
  if (!(tau_l <= p + 1e-9 && p <= tau_r + 1e-9)) {
    std::ostringstream os;
    os << "pclip bracket precondition violated: tau(a_L) = " << tau_l << ", p = " << p << ", tau(a_R) = " << tau_r;
    throw ContractError(os.str());
  }
  IncLowerBound out;
  out.tau_left = tau_l;
  out.tau_right = tau_r;
  const double denom = tau_r - tau_l;
  if (std::abs(denom) < 1e-12) {
    out.povm = left;
  } else {
    const double w = std::clamp((tau_r - p) / denom, 0.0, 1.0);
    out.povm = Povm::mix(left, right, w);
  }
  out.value = probabilities(set, out.povm).success;
  return out;
}

IncReport pcuip(const StateSet& set, const IncParams& params, const std::optional<HermitianOperator>& x_sopt) {
  require_probability(params.p);
  const UpperBound up = pcup(set);

  IncReport r;
  const BracketSearch own = bracket_search(set, up.iterates.last(), params);
  BracketSearch upper = x_sopt ? bracket_search(set, *x_sopt, params) : own;

  r.pcuip = upper.value;
  r.a_left = upper.bracket.a_left;
  r.a_right = upper.bracket.a_right;
  r.epsilon = upper.epsilon;
  r.s_evaluations = std::move(upper.evaluations);
  r.bracket_history = std::move(upper.history);

  const IncLowerBound lower = pclip(set, up.iterates, params.p, own.bracket.a_left, own.bracket.a_right, params.eta);
  r.pclip = lower.value;
  r.povm_bullet = lower.povm;
  return r;
}

}  // namespace qsd
