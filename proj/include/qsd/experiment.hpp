#pragma once

// Randomized comparison of the bounds against the oracle optimum.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qsd/linalg.hpp"
#include "qsd/oracle.hpp"

namespace qsd {

struct ExperimentConfig {
  std::vector<std::size_t> Ms{3};
  std::vector<Index> Rs{1};
  std::optional<Index> N;  // unset: max(M, R + 1) per cell
  int trials = 100;
  std::uint64_t seed = 1;
  double p_lo = 0.0;
  double p_hi = 0.2;
  int J = 3;
  OracleOptions me_oracle{1e-9, 20000, kDefaultEta};
  OracleOptions inc_oracle{1e-7, 20000, kDefaultEta};
  bool record_timing = true;  // false writes 0 so output bytes depend on the seed alone

  // Throws InputError when the invariants do not hold.
  void check() const;
  Index dim_for(std::size_t m, Index r) const;
};

// One (M, R) cell. Relative errors are |bound - opt| / opt averaged over
// included trials, with opt the oracle primal value.
struct CellResult {
  std::size_t M = 0;
  Index R = 0;
  Index N = 0;
  int trials = 0;
  int excluded = 0;    // oracle did not certify within tolerance
  int violations = 0;  // sandwich or order-bound inequality failed on re-check
  int J = 0;
  double err_pcup = 0.0;
  double err_pcup_prime = 0.0;
  double err_qiu = 0.0;
  double err_pclp = 0.0;
  double err_srm = 0.0;
  double err_pcuip = 0.0;
  double err_pclip = 0.0;
  double gap_me = 0.0;   // mean oracle certificate gap
  double gap_inc = 0.0;
  double err_bar = 0.0;  // mean of gap / opt over both oracles, the uncertainty in every err_* column
  double wall_seconds = 0.0;
};

// Trial t of the whole run (cells in M-major order) draws from
// mt19937_64(seed ^ t): first the state set, then p uniform on [p_lo, p_hi].
using ProgressFn = std::function<void(const CellResult&)>;
std::vector<CellResult> run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

std::string experiment_csv(const ExperimentConfig& config, const std::vector<CellResult>& rows);

}  // namespace qsd
