#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qsd/linalg.hpp"

namespace qsd {

struct WeightedState {
  double prior = 0.0;         // xi_m
  HermitianOperator density;  // sigma_m, unit trace
};

// M states with prior probabilities. Construction checks structure only
// (non-empty, square, consistent dimensions); numerical invariants are
// reported by validate().
class StateSet {
 public:
  explicit StateSet(std::vector<WeightedState> states);

  Index dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return states_.size(); }

  double prior(std::size_t m) const { return states_.at(m).prior; }
  const HermitianOperator& density(std::size_t m) const { return states_.at(m).density; }
  // rho_m = xi_m * sigma_m
  const HermitianOperator& weighted(std::size_t m) const { return weighted_.at(m); }
  const std::vector<HermitianOperator>& weighted_states() const noexcept { return weighted_; }
  const std::vector<WeightedState>& states() const noexcept { return states_; }

  // Copy with states 0 and k exchanged.
  StateSet with_swapped(std::size_t k) const;

 private:
  std::vector<WeightedState> states_;
  std::vector<HermitianOperator> weighted_;
  Index dim_ = 0;
};

struct Check {
  std::string name;
  bool passed = true;
  double magnitude = 0.0;  // size of the violation (or the measured quantity)
  std::string detail;
};

struct Diagnostics {
  std::vector<Check> checks;

  bool ok() const;
  std::string summary() const;
};

Diagnostics validate(const StateSet& set);

// G = sum_m rho_m
HermitianOperator gram(const StateSet& set);

// K = M elements (conclusive only) or K = M + 1 with the last element the
// inconclusive outcome.
class Povm {
 public:
  Povm() = default;
  Povm(std::vector<HermitianOperator> elements, bool has_inconclusive);

  Index dim() const noexcept { return elements_.empty() ? 0 : elements_.front().dim(); }
  std::size_t size() const noexcept { return elements_.size(); }
  bool has_inconclusive() const noexcept { return has_inconclusive_; }
  const HermitianOperator& operator[](std::size_t k) const { return elements_.at(k); }
  const std::vector<HermitianOperator>& elements() const noexcept { return elements_; }

  // Element-wise PSD floor and completeness (sum equals identity).
  Diagnostics validate(double tol = 1e-9) const;
  // Throws NumericalError naming the violated check.
  void require_valid(double tol, const std::string& context) const;

  // Convex combination w * a + (1 - w) * b of two POVMs of equal shape.
  static Povm mix(const Povm& a, const Povm& b, double w);

 private:
  std::vector<HermitianOperator> elements_;
  bool has_inconclusive_ = false;
};

struct Probabilities {
  double success = 0.0;       // P_C
  double error = 0.0;         // P_E
  double inconclusive = 0.0;  // P_I
};

Probabilities probabilities(const StateSet& set, const Povm& povm);

// Random ensemble: sigma_m = A A^dagger / Tr(A A^dagger) with A an N x R matrix
// of i.i.d. standard complex Gaussians; priors are normalized i.i.d. standard
// exponentials.
StateSet random_state_set(Index n, std::size_t m, Index rank, std::mt19937_64& rng);
StateSet random_state_set(Index n, std::size_t m, Index rank, std::uint64_t seed);

}  // namespace qsd
