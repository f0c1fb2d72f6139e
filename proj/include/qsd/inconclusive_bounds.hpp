#pragma once

// Bounds on the optimal success probability at a fixed inconclusive rate p.
//
// With X a minimum-error dual-feasible operator (by default X_{M-1} from pcup),
//   s(a) = Tr X + Tr(aG - X)_+ - a p
// upper-bounds the optimum for every a >= 0. The search over a brackets the
// minimizer with the rate functions
//   tau(a)  = Tr[G P>(aG - X)],   tau+(a) = Tr[G P>=(aG - X)]
// and refines it by regula falsi. The lower bound mixes two staircase
// measurements with an inconclusive outcome so that P_I equals p exactly.

#include <optional>
#include <utility>
#include <vector>

#include "qsd/linalg.hpp"
#include "qsd/minerr_bounds.hpp"
#include "qsd/state_model.hpp"

namespace qsd {

struct IncParams {
  double p = 0.0;       // target inconclusive probability, in [0, 1]
  int iterations = 3;   // J regula-falsi rounds
  // Right-bracket padding; when unset a scale-aware default is used (see default_epsilon).
  std::optional<double> epsilon;
  double eta = kDefaultEta;
};

// s(a). Throws ContractError unless x_sopt - rho_m is PSD (within -1e-9) for all m.
double s_of_a(const StateSet& set, const HermitianOperator& x_sopt, double a, double p);

struct RateValues {
  double tau = 0.0;
  double tau_plus = 0.0;
};

RateValues tau(const StateSet& set, const HermitianOperator& x_sopt, double a, double eta = kDefaultEta);

// Extreme eigenvalues of G^{-1/2} X G^{-1/2} on the support of G.
std::pair<double, double> whitened_extremes(const StateSet& set, const HermitianOperator& x_sopt,
                                            double eta = kDefaultEta);

// max(1e-6 * max(1, lambda_max), padding needed so that a_R G - X clears the
// eigenvalue threshold on the whole support of G).
double default_epsilon(const StateSet& set, const HermitianOperator& x_sopt, double eta = kDefaultEta);

struct SEvaluation {
  double a = 0.0;
  double s = 0.0;
  double tau = 0.0;
  double tau_plus = 0.0;
};

struct BracketState {
  double a_left = 0.0;
  double a_right = 0.0;
  double tau_left = 0.0;
  double tau_right = 0.0;
};

struct BracketSearch {
  double value = 0.0;                  // min(1 - p, min of evaluated s(a))
  BracketState bracket;                // final
  std::vector<BracketState> history;   // initial bracket followed by one entry per round
  std::vector<SEvaluation> evaluations;
  double epsilon = 0.0;
};

// Regula-falsi refinement of the minimizer of s(a) for a fixed X.
BracketSearch bracket_search(const StateSet& set, const HermitianOperator& x_sopt, const IncParams& params);

// Staircase POVM with M + 1 outcomes whose last (inconclusive) element is
// P>(aG - X_{M-1}). Throws NumericalError if the result is not a POVM within 1e-9.
Povm pi_a_povm(const StateSet& set, const DualIterate& iterates, double a, double eta = kDefaultEta);

struct IncLowerBound {
  double value = 0.0;  // P_C of the mixed POVM
  Povm povm;           // inconclusive probability equals p
  double tau_left = 0.0;
  double tau_right = 0.0;
};

// Requires tau(a_left) <= p <= tau(a_right) (within 1e-9), else ContractError.
IncLowerBound pclip(const StateSet& set, const DualIterate& iterates, double p, double a_left, double a_right,
                    double eta = kDefaultEta);

struct IncReport {
  double pcuip = 0.0;
  double pclip = 0.0;
  double a_left = 0.0;
  double a_right = 0.0;
  double epsilon = 0.0;
  std::vector<SEvaluation> s_evaluations;
  std::vector<BracketState> bracket_history;
  Povm povm_bullet;
};

// Upper bound by Algorithm-2 style bracket search on s(a), plus the matching
// lower bound. x_sopt replaces X_{M-1} in s(a) when given (for example an
// exact dual optimum); the lower bound always uses the pcup iterates.
IncReport pcuip(const StateSet& set, const IncParams& params,
                const std::optional<HermitianOperator>& x_sopt = std::nullopt);

}  // namespace qsd
