#include "qsd/minerr_bounds.hpp"

#include <algorithm>
#include <limits>

#include "qsd/errors.hpp"

namespace qsd {

UpperBound pcup(const StateSet& set) {
  UpperBound out;
  out.iterates.x.reserve(set.size());
  out.iterates.x.push_back(set.weighted(0));
  for (std::size_t m = 1; m < set.size(); ++m) {
    const HermitianOperator& prev = out.iterates.x.back();
    out.iterates.x.push_back(prev + positive_part(set.weighted(m) - prev));
  }
  out.value = out.iterates.last().trace();
  return out;
}

OrderMinimizedBound pcup_prime(const StateSet& set) {
  OrderMinimizedBound best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t k = 0; k < set.size(); ++k) {
    const double v = k == 0 ? pcup(set).value : pcup(set.with_swapped(k)).value;
    if (v < best.value) best = {v, k};
  }
  return best;
}

double qiu_bound(const StateSet& set) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < set.size(); ++k) {
    double v = set.prior(k);
    for (std::size_t m = 0; m < set.size(); ++m) {
      if (m != k) v += positive_part(set.weighted(m) - set.weighted(k)).trace();
    }
    best = std::min(best, v);
  }
  return best;
}

Staircase build_staircase(const std::vector<HermitianOperator>& residuals, bool last_is_inconclusive, double eta) {
  if (residuals.empty()) throw ContractError("staircase needs at least one residual operator");
  const std::size_t k_count = residuals.size() + 1;
  const Index n = residuals.front().dim();

  StaircaseFactors f;
  f.projectors.resize(k_count - 1);
  f.products.resize(k_count);
  f.products[k_count - 1] = Matrix::Identity(n, n);
  for (std::size_t m = k_count - 1; m >= 1; --m) {
    const Matrix& a = f.products[m];
    f.projectors[m - 1] = proj_nonneg(residuals[m - 1].congruence(a), eta);
    f.products[m - 1] = f.projectors[m - 1].matrix() * a;
  }

  std::vector<HermitianOperator> elements(k_count);
  auto abs2 = [](const Matrix& a) { return HermitianOperator::symmetrized(a.adjoint() * a); };
  elements[0] = abs2(f.products[0]);
  for (std::size_t m = 1; m < k_count; ++m) {
    elements[m] = HermitianOperator::symmetrized(f.products[m].adjoint() * f.products[m] -
                                                 f.products[m - 1].adjoint() * f.products[m - 1]);
  }
  return {Povm(std::move(elements), last_is_inconclusive), std::move(f)};
}

namespace {

std::vector<HermitianOperator> minerr_residuals(const StateSet& set, const DualIterate& iterates) {
  std::vector<HermitianOperator> t;
  t.reserve(set.size() - 1);
  for (std::size_t m = 1; m < set.size(); ++m) t.push_back(iterates.x[m - 1] - set.weighted(m));
  return t;
}

Staircase trivial_staircase(const StateSet& set) {
  return {Povm({HermitianOperator::identity(set.dim())}, false), {{}, {Matrix::Identity(set.dim(), set.dim())}}};
}

}  // namespace

Staircase staircase_povm(const StateSet& set, const DualIterate& iterates, double eta) {
  if (iterates.size() != set.size()) throw ContractError("staircase_povm: iterates do not match the state set");
  if (set.size() == 1) return trivial_staircase(set);
  Staircase s = build_staircase(minerr_residuals(set, iterates), false, eta);
  s.povm.require_valid(1e-9, "staircase_povm");
  return s;
}

double pclp(const StateSet& set, double eta) {
  const Staircase s = staircase_povm(set, pcup(set).iterates, eta);
  return probabilities(set, s.povm).success;
}

SrmResult srm(const StateSet& set, double eta) {
  const HermitianOperator g = gram(set);
  const InvSqrtResult root = inv_sqrt_psd(g, eta);
  std::vector<HermitianOperator> elements;
  elements.reserve(set.size());
  for (const HermitianOperator& rho : set.weighted_states()) elements.push_back(rho.congruence(root.op.matrix()));
  if (root.rank_deficient) elements[0] += SupportBasis(g, eta).kernel_projector();
  SrmResult out{Povm(std::move(elements), false), 0.0};
  out.value = probabilities(set, out.povm).success;
  return out;
}

bool AttainabilityCertificate::support_hypothesis_holds() const {
  return std::all_of(support_conditions.begin(), support_conditions.end(), [](bool b) { return b; });
}

AttainabilityCertificate attainability_certificate(const StateSet& set, double tol, double eta) {
  const UpperBound up = pcup(set);
  const Staircase stair = staircase_povm(set, up.iterates, eta);
  const double lower = probabilities(set, stair.povm).success;

  AttainabilityCertificate cert;
  cert.gap = up.value - lower;
  cert.attained = cert.gap <= tol;

  const std::size_t m_count = set.size();
  for (std::size_t m = 1; m < m_count; ++m) {
    const Matrix& a = stair.factors.products[m];
    const HermitianOperator residual = up.iterates.x[m - 1] - set.weighted(m);
    const HermitianOperator transformed = residual.congruence(a);
    if (m + 1 < m_count) {
      const HermitianOperator lhs = positive_part(residual).congruence(a);
      cert.commute_residuals.push_back((lhs - positive_part(transformed)).frobenius_norm());
    }
    // |T| has the same support as the Hermitian T.
    const HermitianOperator abs_t = positive_part(transformed) + positive_part(-transformed);
    const HermitianOperator axa = up.iterates.x[m].congruence(a);
    cert.support_conditions.push_back(support_subset(abs_t, axa, eta) && support_subset(axa, abs_t, eta));
  }
  return cert;
}

BoundReport minerr_report(const StateSet& set, double attain_tol, double eta) {
  BoundReport r;
  UpperBound up = pcup(set);
  r.pcup = up.value;
  r.dual_above_one = up.value > 1.0;
  const OrderMinimizedBound prime = pcup_prime(set);
  r.pcup_prime = prime.value;
  r.pcup_prime_argmin = prime.argmin_k;
  r.qiu = qiu_bound(set);
  r.pclp = probabilities(set, staircase_povm(set, up.iterates, eta).povm).success;
  r.srm_value = srm(set, eta).value;
  r.gap = r.pcup - r.pclp;
  r.attained = r.gap <= attain_tol;
  r.iterates = std::move(up.iterates);
  return r;
}

}  // namespace qsd
