#pragma once

// Bounds on the optimal success probability of minimum-error discrimination.
//
// The upper bound accumulates a dual-feasible operator state by state,
//   X_0 = rho_0,  X_{m+1} = X_m + (rho_{m+1} - X_m)_+,
// and reports Tr X_{M-1}. The same iterates define a "staircase" measurement
// built from nested projectors, whose success probability is the lower bound.

#include <cstddef>
#include <vector>

#include "qsd/linalg.hpp"
#include "qsd/state_model.hpp"

namespace qsd {

struct DualIterate {
  std::vector<HermitianOperator> x;  // X_0 ... X_{M-1}

  const HermitianOperator& last() const { return x.back(); }
  std::size_t size() const noexcept { return x.size(); }
};

struct UpperBound {
  double value = 0.0;  // Tr X_{M-1}; may exceed 1 and is never clamped
  DualIterate iterates;
};

UpperBound pcup(const StateSet& set);

struct OrderMinimizedBound {
  double value = 0.0;
  std::size_t argmin_k = 0;  // swap partner of state 0 achieving the minimum
};

// Minimum of pcup over the M sets obtained by exchanging state 0 with state k.
OrderMinimizedBound pcup_prime(const StateSet& set);

// min_k [xi_k + sum_{m != k} Tr(rho_m - rho_k)_+]
double qiu_bound(const StateSet& set);

struct StaircaseFactors {
  std::vector<HermitianOperator> projectors;  // e_1 ... e_{M-1} (projectors[i] is e_{i+1})
  std::vector<Matrix> products;               // a_0 ... a_{M-1}, a_m = e_{m+1} ... e_{M-1}, a_{M-1} = I
};

struct Staircase {
  Povm povm;
  StaircaseFactors factors;
};

// Generic staircase over K outcomes: given residual operators T_1 ... T_{K-1},
// builds e_m = P>=[a_m T_m a_m^dagger] from m = K-1 down to 1 and
// Pi_m = |a_m|^2 - |a_{m-1}|^2, Pi_0 = |a_0|^2.
Staircase build_staircase(const std::vector<HermitianOperator>& residuals, bool last_is_inconclusive,
                          double eta = kDefaultEta);

// Staircase with residuals T_m = X_{m-1} - rho_m. Throws NumericalError if the
// result is not a POVM within 1e-9.
Staircase staircase_povm(const StateSet& set, const DualIterate& iterates, double eta = kDefaultEta);

// Success probability of the staircase POVM.
double pclp(const StateSet& set, double eta = kDefaultEta);

struct SrmResult {
  Povm povm;
  double value = 0.0;
};

// Square-root measurement G^{-1/2} rho_m G^{-1/2}. On a rank-deficient Gram
// operator the kernel projector is added to element 0 so the POVM is complete.
SrmResult srm(const StateSet& set, double eta = kDefaultEta);

struct AttainabilityCertificate {
  bool attained = false;
  double gap = 0.0;  // pcup - pclp
  // ||a_m (X_{m-1} - rho_m)_+ a_m^dagger - [a_m (X_{m-1} - rho_m) a_m^dagger]_+||_F, m = 1 ... M-2
  std::vector<double> commute_residuals;
  // supp[a_m (X_{m-1} - rho_m) a_m^dagger] == supp[a_m X_m a_m^dagger], m = 1 ... M-1
  std::vector<bool> support_conditions;

  bool support_hypothesis_holds() const;
};

// Certifies pcup as the exact optimum when pcup - pclp <= tol, and reports the
// commutation residuals and support conditions as diagnostics.
AttainabilityCertificate attainability_certificate(const StateSet& set, double tol = 1e-8,
                                                   double eta = kDefaultEta);

struct BoundReport {
  double pcup = 0.0;
  double pcup_prime = 0.0;
  std::size_t pcup_prime_argmin = 0;
  double qiu = 0.0;
  double pclp = 0.0;
  double srm_value = 0.0;
  bool attained = false;
  double gap = 0.0;
  bool dual_above_one = false;  // pcup > 1, reported raw
  DualIterate iterates;
};

BoundReport minerr_report(const StateSet& set, double attain_tol = 1e-8, double eta = kDefaultEta);

}  // namespace qsd
