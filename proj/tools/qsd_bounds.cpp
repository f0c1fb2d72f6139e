#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qsd/errors.hpp"
#include "qsd/experiment.hpp"
#include "qsd/inconclusive_bounds.hpp"
#include "qsd/minerr_bounds.hpp"
#include "qsd/oracle.hpp"
#include "qsd/state_io.hpp"

namespace {

using nlohmann::json;
using qsd::format_double;

constexpr int kNumerical = 1;
constexpr int kInput = 2;

qsd::StateSet load(const std::string& path) {
  qsd::StateSet set = qsd::read_state_set(path);
  const qsd::Diagnostics d = qsd::validate(set);
  if (!d.ok()) throw qsd::InputError(path + ": invalid state set\n" + d.summary());
  return set;
}

void line(const std::string& key, double v) { std::cout << key << ' ' << format_double(v) << '\n'; }

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw qsd::InputError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

int cmd_validate(const std::string& file) {
  const qsd::StateSet set = qsd::read_state_set(file);
  const qsd::Diagnostics d = qsd::validate(set);
  std::cout << d.summary();
  if (!d.ok()) return kInput;
  std::cout << "ok: " << set.size() << " states, dim " << set.dim() << '\n';
  return 0;
}

int cmd_bounds_me(const std::string& file, const std::string& json_out, double tol) {
  const qsd::StateSet set = load(file);
  const qsd::BoundReport r = qsd::minerr_report(set);
  qsd::OracleOptions opts;
  opts.tol = tol;
  std::optional<qsd::OracleCertificate> cert;
  bool converged = true;
  try {
    cert = qsd::minerr_oracle(set, opts);
  } catch (const qsd::OracleNotConverged& e) {
    cert = e.certificate();
    converged = false;
    std::cerr << "warning: " << e.what() << '\n';
  }
  line("pcup", r.pcup);
  line("pcup_prime", r.pcup_prime);
  std::cout << "pcup_prime_argmin " << r.pcup_prime_argmin << '\n';
  line("qiu", r.qiu);
  line("pclp", r.pclp);
  line("srm", r.srm_value);
  line("oracle_primal", cert->primal_value);
  line("oracle_dual", cert->dual_value);
  line("oracle_gap", cert->gap);
  line("gap_pcup_pclp", r.gap);
  line("gap_pcup_oracle", r.pcup - cert->primal_value);
  std::cout << "attained " << (r.attained ? "true" : "false") << '\n';
  if (r.dual_above_one) std::cout << "warning: pcup exceeds 1\n";
  if (!json_out.empty()) {
    write_json(json_out, {{"pcup", r.pcup},
                          {"pcup_prime", r.pcup_prime},
                          {"pcup_prime_argmin", r.pcup_prime_argmin},
                          {"qiu", r.qiu},
                          {"pclp", r.pclp},
                          {"srm", r.srm_value},
                          {"attained", r.attained},
                          {"dual_above_one", r.dual_above_one},
                          {"oracle", {{"primal", cert->primal_value},
                                      {"dual", cert->dual_value},
                                      {"gap", cert->gap},
                                      {"converged", converged}}}});
  }
  return converged ? 0 : kNumerical;
}

int cmd_bounds_inc(const std::string& file, double p, int iters, const std::string& json_out, double tol) {
  const qsd::StateSet set = load(file);
  if (!(p >= 0.0 && p <= 1.0)) throw qsd::InputError("--p must lie in [0, 1]");
  if (iters < 0) throw qsd::InputError("--iters must be nonnegative");
  qsd::IncParams params;
  params.p = p;
  params.iterations = iters;
  const qsd::IncReport r = qsd::pcuip(set, params);
  qsd::OracleOptions opts;
  opts.tol = tol;
  std::optional<qsd::OracleCertificate> cert;
  bool converged = true;
  try {
    cert = qsd::inc_oracle(set, p, opts);
  } catch (const qsd::OracleNotConverged& e) {
    cert = e.certificate();
    converged = false;
    std::cerr << "warning: " << e.what() << '\n';
  }
  line("pcuip", r.pcuip);
  line("pclip", r.pclip);
  line("oracle_primal", cert->primal_value);
  line("oracle_dual", cert->dual_value);
  line("oracle_gap", cert->gap);
  line("a_left", r.a_left);
  line("a_right", r.a_right);
  line("epsilon", r.epsilon);
  std::cout << "round a_left a_right tau_left tau_right\n";
  for (std::size_t j = 0; j < r.bracket_history.size(); ++j) {
    const qsd::BracketState& b = r.bracket_history[j];
    std::cout << j << ' ' << format_double(b.a_left) << ' ' << format_double(b.a_right) << ' '
              << format_double(b.tau_left) << ' ' << format_double(b.tau_right) << '\n';
  }
  std::cout << "eval a s tau tau_plus\n";
  json trace = json::array();
  for (std::size_t j = 0; j < r.s_evaluations.size(); ++j) {
    const qsd::SEvaluation& e = r.s_evaluations[j];
    std::cout << j << ' ' << format_double(e.a) << ' ' << format_double(e.s) << ' ' << format_double(e.tau) << ' '
              << format_double(e.tau_plus) << '\n';
    trace.push_back({{"a", e.a}, {"s", e.s}, {"tau", e.tau}, {"tau_plus", e.tau_plus}});
  }
  if (!json_out.empty()) {
    write_json(json_out, {{"p", p},
                          {"iterations", iters},
                          {"pcuip", r.pcuip},
                          {"pclip", r.pclip},
                          {"a_left", r.a_left},
                          {"a_right", r.a_right},
                          {"epsilon", r.epsilon},
                          {"s_trace", trace},
                          {"oracle", {{"primal", cert->primal_value},
                                      {"dual", cert->dual_value},
                                      {"gap", cert->gap},
                                      {"converged", converged}}}});
  }
  return converged ? 0 : kNumerical;
}

int cmd_oracle(const std::string& kind, const std::string& file, double p, double tol, const std::string& povm_out) {
  const qsd::StateSet set = load(file);
  qsd::OracleOptions opts;
  opts.tol = tol;
  qsd::OracleCertificate cert;
  if (kind == "me") {
    cert = qsd::minerr_oracle(set, opts);
  } else {
    if (!(p >= 0.0 && p <= 1.0)) throw qsd::InputError("--p must lie in [0, 1]");
    cert = qsd::inc_oracle(set, p, opts);
  }
  line("primal", cert.primal_value);
  line("dual", cert.dual_value);
  line("gap", cert.gap);
  if (kind == "inc") line("dual_scalar", cert.dual_scalar);
  std::cout << "iterations " << cert.iterations << '\n';
  if (!povm_out.empty()) {
    std::ofstream out(povm_out);
    if (!out) throw qsd::InputError("cannot open " + povm_out + " for writing");
    out << qsd::to_json(cert.povm);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounds for minimum-error and inconclusive quantum state discrimination"};
  app.require_subcommand(1);

  std::string file;
  std::string json_out;
  double p = 0.0;
  int iters = 3;
  double tol = 1e-6;

  auto* validate = app.add_subcommand("validate", "Check a state-set file");
  validate->add_option("file", file)->required();

  auto* bounds = app.add_subcommand("bounds", "Compute all bounds for a state set");
  bounds->require_subcommand(1);
  auto* bounds_me = bounds->add_subcommand("me", "Minimum-error bounds");
  bounds_me->add_option("file", file)->required();
  bounds_me->add_option("--json", json_out, "Write the report as JSON");
  bounds_me->add_option("--oracle-tol", tol, "Oracle certificate gap");
  auto* bounds_inc = bounds->add_subcommand("inc", "Bounds at a fixed inconclusive rate");
  bounds_inc->add_option("file", file)->required();
  bounds_inc->add_option("--p", p, "Inconclusive probability")->required();
  bounds_inc->add_option("--iters", iters, "Regula-falsi rounds J");
  bounds_inc->add_option("--json", json_out, "Write the report as JSON");
  bounds_inc->add_option("--oracle-tol", tol, "Oracle certificate gap");

  std::string kind;
  std::string povm_out;
  auto* oracle = app.add_subcommand("oracle", "Certified optimum");
  oracle->add_option("kind", kind)->required()->check(CLI::IsMember({"me", "inc"}));
  oracle->add_option("file", file)->required();
  oracle->add_option("--p", p, "Inconclusive probability (inc only)");
  oracle->add_option("--tol", tol, "Certificate gap");
  oracle->add_option("--povm", povm_out, "Write the optimal POVM as JSON");

  qsd::ExperimentConfig cfg;
  std::vector<std::size_t> ms;
  std::vector<qsd::Index> rs;
  qsd::Index n = 0;
  std::string out_path;
  bool no_timing = false;
  auto* experiment = app.add_subcommand("experiment", "Randomized comparison against the oracle; CSV output");
  experiment->add_option("--M", ms, "Numbers of states")->required();
  experiment->add_option("--R", rs, "Ranks of the random states")->required();
  experiment->add_option("--N", n, "Hilbert-space dimension (default max(M, R+1))");
  experiment->add_option("--trials", cfg.trials, "Trials per cell")->capture_default_str();
  experiment->add_option("--seed", cfg.seed)->capture_default_str();
  experiment->add_option("--p-lo", cfg.p_lo)->capture_default_str();
  experiment->add_option("--p-hi", cfg.p_hi)->capture_default_str();
  experiment->add_option("--iters", cfg.J, "Regula-falsi rounds J")->capture_default_str();
  experiment->add_option("--out", out_path, "CSV file (default stdout)");
  experiment->add_flag("--no-timing", no_timing, "Write 0 in the wall_seconds column");

  std::size_t gen_m = 2;
  qsd::Index gen_n = 2;
  qsd::Index gen_r = 1;
  std::uint64_t gen_seed = 1;
  auto* generate = app.add_subcommand("generate", "Write a random state set");
  generate->add_option("--M", gen_m)->capture_default_str();
  generate->add_option("--N", gen_n)->capture_default_str();
  generate->add_option("--R", gen_r)->capture_default_str();
  generate->add_option("--seed", gen_seed)->capture_default_str();
  generate->add_option("--out", out_path, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kInput;
  }

  try {
    if (*validate) return cmd_validate(file);
    if (*bounds_me) return cmd_bounds_me(file, json_out, tol);
    if (*bounds_inc) return cmd_bounds_inc(file, p, iters, json_out, tol);
    if (*oracle) return cmd_oracle(kind, file, p, tol, povm_out);
    if (*experiment) {
      cfg.Ms = ms;
      cfg.Rs = rs;
      if (n > 0) cfg.N = n;
      cfg.record_timing = !no_timing;
      const auto rows = qsd::run_experiment(cfg, [](const qsd::CellResult& c) {
        std::cerr << "cell M=" << c.M << " R=" << c.R << " N=" << c.N << " done, excluded " << c.excluded << '\n';
      });
      const std::string csv = qsd::experiment_csv(cfg, rows);
      if (out_path.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw qsd::InputError("cannot open " + out_path + " for writing");
        out << csv;
      }
      return 0;
    }
    if (*generate) {
      if (gen_m < 1 || gen_n < 1 || gen_r < 1 || gen_r > gen_n) throw qsd::InputError("need M >= 1 and 1 <= R <= N");
      const qsd::StateSet set = qsd::random_state_set(gen_n, gen_m, gen_r, gen_seed);
      if (out_path.empty()) {
        std::cout << qsd::to_json(set);
      } else {
        qsd::write_state_set(out_path, set);
      }
      return 0;
    }
  } catch (const qsd::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const qsd::ContractError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const qsd::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  }
  return 0;
}
