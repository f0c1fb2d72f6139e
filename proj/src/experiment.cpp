#include "qsd/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "qsd/errors.hpp"
#include "qsd/inconclusive_bounds.hpp"
#include "qsd/minerr_bounds.hpp"
#include "qsd/state_io.hpp"

namespace qsd {

void ExperimentConfig::check() const {
  if (Ms.empty() || Rs.empty()) throw InputError("experiment: M and R lists must be non-empty");
  if (trials < 1) throw InputError("experiment: trials must be at least 1");
  if (J < 0) throw InputError("experiment: J must be nonnegative");
  if (!(0.0 <= p_lo && p_lo <= p_hi && p_hi <= 1.0)) throw InputError("experiment: need 0 <= p_lo <= p_hi <= 1");
  for (std::size_t m : Ms) {
    if (m < 1) throw InputError("experiment: M must be at least 1");
    for (Index r : Rs) {
      if (r < 1 || r > dim_for(m, r)) throw InputError("experiment: need 1 <= R <= N");
    }
  }
}

Index ExperimentConfig::dim_for(std::size_t m, Index r) const {
  return N.value_or(std::max(static_cast<Index>(m), r + 1));
}

namespace {

struct TrialOutcome {
  bool excluded = false;
  bool violation = false;
  double err[7] = {};
  double gap_me = 0.0;
  double gap_inc = 0.0;
  double rel_gap = 0.0;
};

double rel(double bound, double opt) { return std::abs(bound - opt) / opt; }

TrialOutcome run_trial(const ExperimentConfig& cfg, std::size_t m, Index r, Index n, std::uint64_t trial) {
  std::mt19937_64 rng(cfg.seed ^ trial);
  const StateSet set = random_state_set(n, m, r, rng);
  const double p = std::uniform_real_distribution<double>(cfg.p_lo, cfg.p_hi)(rng);

  TrialOutcome out;
  OracleCertificate me;
  OracleCertificate inc;
  try {
    me = minerr_oracle(set, cfg.me_oracle);
    inc = inc_oracle(set, p, cfg.inc_oracle);
  } catch (const OracleNotConverged&) {
    out.excluded = true;
    return out;
  }

  const BoundReport b = minerr_report(set);
  IncParams params;
  params.p = p;
  params.iterations = cfg.J;
  const IncReport ib = pcuip(set, params);

  // Re-check from the certificates at emission time.
  const CertificateCheck cm = recheck_certificate(set, me);
  const CertificateCheck ci = recheck_certificate(set, inc, p);
  out.violation = b.pclp > cm.dual_value + 1e-9 || cm.primal_value > b.pcup + 1e-9 ||
                  ib.pclip > ci.dual_value + 1e-9 || ci.primal_value > ib.pcuip + 1e-9 ||
                  b.pcup_prime > b.qiu + 1e-10 || cm.dual_violation > 1e-9 || ci.dual_violation > 1e-9;

  const double opt = me.primal_value;
  const double opt_p = inc.primal_value;
  out.err[0] = rel(b.pcup, opt);
  out.err[1] = rel(b.pcup_prime, opt);
  out.err[2] = rel(b.qiu, opt);
  out.err[3] = rel(b.pclp, opt);
  out.err[4] = rel(b.srm_value, opt);
  out.err[5] = rel(ib.pcuip, opt_p);
  out.err[6] = rel(ib.pclip, opt_p);
  out.gap_me = me.gap;
  out.gap_inc = inc.gap;
  out.rel_gap = std::max(me.gap / opt, inc.gap / opt_p);
  return out;
}

}  // namespace

std::vector<CellResult> run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  config.check();
  std::vector<CellResult> rows;
  std::uint64_t trial = 0;
  for (std::size_t m : config.Ms) {
    for (Index r : config.Rs) {
      const auto start = std::chrono::steady_clock::now();
      CellResult c;
      c.M = m;
      c.R = r;
      c.N = config.dim_for(m, r);
      c.trials = config.trials;
      c.J = config.J;
      double sums[7] = {};
      double gap_me = 0.0;
      double gap_inc = 0.0;
      double bar = 0.0;
      for (int t = 0; t < config.trials; ++t, ++trial) {
        const TrialOutcome o = run_trial(config, m, r, c.N, trial);
        if (o.excluded) {
          ++c.excluded;
          continue;
        }
        if (o.violation) ++c.violations;
        for (int k = 0; k < 7; ++k) sums[k] += o.err[k];
        gap_me += o.gap_me;
        gap_inc += o.gap_inc;
        bar += o.rel_gap;
      }
      const int used = c.trials - c.excluded;
      if (used > 0) {
        const double inv = 1.0 / used;
        double* cols[7] = {&c.err_pcup, &c.err_pcup_prime, &c.err_qiu, &c.err_pclp,
                           &c.err_srm,  &c.err_pcuip,      &c.err_pclip};
        for (int k = 0; k < 7; ++k) *cols[k] = sums[k] * inv;
        c.gap_me = gap_me * inv;
        c.gap_inc = gap_inc * inv;
        c.err_bar = bar * inv;
      } else {
        c.err_pcup = c.err_pcup_prime = c.err_qiu = c.err_pclp = c.err_srm = c.err_pcuip = c.err_pclip = NAN;
      }
      if (config.record_timing) {
        c.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
      if (progress) progress(c);
      rows.push_back(c);
    }
  }
  return rows;
}

std::string experiment_csv(const ExperimentConfig& config, const std::vector<CellResult>& rows) {
  std::ostringstream os;
  os << "# qsd-bounds v1\n";
  os << "# ensemble: sigma = A A^dagger / Tr(A A^dagger), A N x R complex Gaussian; priors normalized Exp(1)\n";
  os << "# seed " << config.seed << ", p uniform on [" << format_double(config.p_lo) << ", "
     << format_double(config.p_hi) << "], N "
     << (config.N ? std::to_string(*config.N) : std::string("max(M, R+1)")) << "\n";
  os << "M,R,N,trials,excluded,violations,J,mean_rel_err_pcup,mean_rel_err_pcup_prime,mean_rel_err_qiu,"
        "mean_rel_err_pclp,mean_rel_err_srm,mean_rel_err_pcuip,mean_rel_err_pclip,oracle_mean_gap_me,"
        "oracle_mean_gap_inc,err_bar,wall_seconds\n";
  for (const CellResult& c : rows) {
    os << c.M << ',' << c.R << ',' << c.N << ',' << c.trials << ',' << c.excluded << ',' << c.violations << ','
       << c.J;
    for (double v : {c.err_pcup, c.err_pcup_prime, c.err_qiu, c.err_pclp, c.err_srm, c.err_pcuip, c.err_pclip,
                     c.gap_me, c.gap_inc, c.err_bar, c.wall_seconds}) {
      os << ',' << format_double(v);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace qsd
