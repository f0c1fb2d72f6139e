#include "qsd/state_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qsd/errors.hpp"

namespace qsd {

StateSet::StateSet(std::vector<WeightedState> states) : states_(std::move(states)) {
  if (states_.empty()) throw InputError("state set must contain at least one state");
  dim_ = states_.front().density.dim();
  if (dim_ == 0) throw InputError("state dimension must be positive");
  weighted_.reserve(states_.size());
  for (std::size_t m = 0; m < states_.size(); ++m) {
    if (states_[m].density.dim() != dim_) {
      throw InputError("state " + std::to_string(m) + " has dimension " +
                       std::to_string(states_[m].density.dim()) + ", expected " + std::to_string(dim_));
    }
    if (!std::isfinite(states_[m].prior)) throw InputError("state " + std::to_string(m) + " has a non-finite prior");
    weighted_.push_back(states_[m].prior * states_[m].density);
  }
}

StateSet StateSet::with_swapped(std::size_t k) const {
  if (k >= states_.size()) throw ContractError("swap index out of range");
  std::vector<WeightedState> copy = states_;
  std::swap(copy[0], copy[k]);
  return StateSet(std::move(copy));
}

bool Diagnostics::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::string Diagnostics::summary() const {
  std::ostringstream os;
  for (const Check& c : checks) {
    os << (c.passed ? "ok   " : "FAIL ") << c.name << " (" << c.magnitude << ")";
    if (!c.detail.empty()) os << ": " << c.detail;
    os << '\n';
  }
  return os.str();
}

Diagnostics validate(const StateSet& set) {
  Diagnostics d;
  double prior_sum = 0.0;
  for (std::size_t m = 0; m < set.size(); ++m) {
    const std::string tag = "state[" + std::to_string(m) + "]";
    const double xi = set.prior(m);
    prior_sum += xi;
    d.checks.push_back({tag + ".prior_positive", xi > 0.0 && xi <= 1.0, xi, xi > 0.0 && xi <= 1.0 ? "" : "prior must lie in (0, 1]"});

    const double lmin = lambda_min(set.density(m));
    const bool psd = lmin >= -1e-10;
    d.checks.push_back({tag + ".psd", psd, lmin, psd ? "" : "negative eigenvalue"});

    const double tr = set.density(m).trace();
    const bool unit = std::abs(tr - 1.0) <= 1e-10;
    d.checks.push_back({tag + ".unit_trace", unit, tr, unit ? "" : "trace differs from 1"});
  }
  const bool sum_ok = std::abs(prior_sum - 1.0) <= 1e-10;
  std::ostringstream os;
  os.precision(17);
  os << "prior sum " << prior_sum;
  d.checks.push_back({"prior_sum", sum_ok, prior_sum, sum_ok ? "" : os.str()});

  const double tr_g = gram(set).trace();
  const bool g_ok = std::abs(tr_g - 1.0) <= 1e-9;
  d.checks.push_back({"gram_trace", g_ok, tr_g, g_ok ? "" : "Tr G differs from 1"});
  return d;
}

HermitianOperator gram(const StateSet& set) {
  HermitianOperator g = HermitianOperator::zero(set.dim());
  for (const HermitianOperator& rho : set.weighted_states()) g += rho;
  return g;
}

Povm::Povm(std::vector<HermitianOperator> elements, bool has_inconclusive)
    : elements_(std::move(elements)), has_inconclusive_(has_inconclusive) {
  if (elements_.empty()) throw InputError("POVM must have at least one element");
  const Index n = elements_.front().dim();
  for (const HermitianOperator& e : elements_) {
    if (e.dim() != n) throw InputError("POVM elements have inconsistent dimensions");
  }
}

Diagnostics Povm::validate(double tol) const {
  Diagnostics d;
  const Index n = dim();
  Matrix sum = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    const double lmin = lambda_min(elements_[k]);
    d.checks.push_back({"element[" + std::to_string(k) + "].psd", lmin >= -tol, lmin, ""});
    sum += elements_[k].matrix();
  }
  const double dev = (sum - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  d.checks.push_back({"completeness", dev <= tol, dev, dev <= tol ? "" : "elements do not sum to identity"});
  return d;
}

void Povm::require_valid(double tol, const std::string& context) const {
  const Diagnostics d = validate(tol);
  if (!d.ok()) throw NumericalError(context + ": POVM consistency check failed\n" + d.summary());
}

Povm Povm::mix(const Povm& a, const Povm& b, double w) {
  if (a.size() != b.size() || a.dim() != b.dim()) throw ContractError("cannot mix POVMs of different shape");
  std::vector<HermitianOperator> out;
  out.reserve(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out.push_back(w * a[k] + (1.0 - w) * b[k]);
  return Povm(std::move(out), a.has_inconclusive());
}

Probabilities probabilities(const StateSet& set, const Povm& povm) {
  const std::size_t m_count = set.size();
  if (povm.dim() != set.dim()) {
    throw InputError("POVM dimension " + std::to_string(povm.dim()) + " does not match state dimension " +
                     std::to_string(set.dim()));
  }
  if (povm.size() != m_count && povm.size() != m_count + 1) {
    throw InputError("POVM must have M or M+1 elements");
  }
  Probabilities p;
  for (std::size_t m = 0; m < m_count; ++m) {
    for (std::size_t k = 0; k < m_count; ++k) {
      const double v = set.weighted(m).trace_product(povm[k]);
      if (k == m) {
        p.success += v;
      } else {
        p.error += v;
      }
    }
  }
  if (povm.size() == m_count + 1) p.inconclusive = gram(set).trace_product(povm[m_count]);
  return p;
}

StateSet random_state_set(Index n, std::size_t m, Index rank, std::mt19937_64& rng) {
  if (n < 1 || m < 1) throw InputError("random_state_set: N and M must be positive");
  if (rank < 1 || rank > n) throw InputError("random_state_set: rank must satisfy 1 <= R <= N");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);

  std::vector<double> priors(m);
  for (double& xi : priors) xi = expo(rng);
  double total = 0.0;
  for (double xi : priors) total += xi;

  std::vector<WeightedState> states;
  states.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    Matrix a(n, rank);
    for (Index j = 0; j < rank; ++j) {
      for (Index i = 0; i < n; ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        a(i, j) = Complex(re, im);
      }
    }
    Matrix s = a * a.adjoint();
    s /= s.trace().real();
    states.push_back({priors[k] / total, HermitianOperator::symmetrized(s)});
  }
  return StateSet(std::move(states));
}

StateSet random_state_set(Index n, std::size_t m, Index rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_state_set(n, m, rank, rng);
}

}  // namespace qsd
