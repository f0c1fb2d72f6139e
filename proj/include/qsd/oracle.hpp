#pragma once

// Desk-scale reference solver. Produces a primal POVM and a dual-feasible
// operator whose values bracket the optimum; the gap between them is the
// correctness certificate.

#include "qsd/errors.hpp"
#include "qsd/linalg.hpp"
#include "qsd/state_model.hpp"

namespace qsd {

struct OracleOptions {
  double tol = 1e-6;       // required certificate gap
  int max_iters = 10000;   // fixed-point iterations per inner solve
  double eta = kDefaultEta;
};

struct OracleCertificate {
  double primal_value = 0.0;  // P_C(povm)
  double dual_value = 0.0;    // Tr Z - a p
  double gap = 0.0;           // dual - primal
  Povm povm;                  // M elements, or M + 1 for the inconclusive problem
  HermitianOperator dual_operator;
  double dual_scalar = 0.0;   // a; zero for minimum-error
  int iterations = 0;         // total fixed-point iterations
};

// Thrown when the gap stays above tol. The carried certificate is still sound
// (its values are valid, if loose, bounds).
class OracleNotConverged : public NumericalError {
 public:
  OracleNotConverged(const std::string& what, OracleCertificate cert)
      : NumericalError(what), certificate_(std::move(cert)) {}
  const OracleCertificate& certificate() const noexcept { return certificate_; }

 private:
  OracleCertificate certificate_;
};

OracleCertificate minerr_oracle(const StateSet& set, const OracleOptions& options = {});

// Optimal success probability at inconclusive rate p.
OracleCertificate inc_oracle(const StateSet& set, double p, const OracleOptions& options = {});

struct CertificateCheck {
  double primal_value = 0.0;       // recomputed P_C
  double inconclusive = 0.0;       // recomputed P_I
  double dual_value = 0.0;         // recomputed Tr Z - a p
  double povm_violation = 0.0;     // max(completeness error, -lambda_min over elements)
  double dual_violation = 0.0;     // max(0, -lambda_min(Z - rho_m), -lambda_min(Z - a G))
};

// Recomputes every certified quantity from scratch.
CertificateCheck recheck_certificate(const StateSet& set, const OracleCertificate& cert, double p = 0.0);

}  // namespace qsd
