#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "pitomo/design.hpp"
#include "pitomo/pretest.hpp"
#include "pitomo/reconstruct.hpp"
#include "pitomo/serialization.hpp"
#include "pitomo/sim.hpp"

namespace pitomo::cli {

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Csv {
 public:
  explicit Csv(const std::string& path) : file_(path) {
    if (!file_) throw InputError("cannot write '" + path + "'");
    file_ << std::setprecision(17);
  }
  template <typename... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((file_ << (first ? "" : ",") << values, first = false), ...);
    file_ << '\n';
  }
  std::ofstream& stream() { return file_; }

 private:
  std::ofstream file_;
};

int max_qubits_checked() {
  const char* env = std::getenv("PITOMO_MAX_QUBITS");
  if (env == nullptr) return kDefaultMaxQubits;
  char* end = nullptr;
  const long value = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || value < 1 || value > kHardMaxQubits) {
    throw InputError("PITOMO_MAX_QUBITS must be an integer in [1, " + std::to_string(kHardMaxQubits) + "]");
  }
  return static_cast<int>(value);
}

void check_n(int n) {
  const int cap = max_qubits_checked();
  if (n < 1 || n > cap) {
    throw InputError("--n must lie in [1, " + std::to_string(cap) + "] (raise PITOMO_MAX_QUBITS for more)");
  }
}

std::vector<Setting> load_settings(const std::string& path, std::ostream& err) {
  std::vector<std::string> warnings;
  auto settings = settings_from_json(read_json_file(path), &warnings);
  for (const auto& w : warnings) err << "warning: " << path << ": " << w << '\n';
  if (settings.empty()) throw InputError("'" + path + "' holds no settings");
  return settings;
}

void emit_json(const Json& j, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_json_file(path, j);
  }
}

SpinEnsemble named_state(const std::string& name, int n, int k, const DickeMixtureParams& mix,
                         std::uint64_t seed) {
  const SpinSectorLayout layout(n);
  if (name == "ghz") return ghz_ensemble(n);
  if (name == "dicke") return dicke_ensemble(n, k < 0 ? n / 2 : k);
  if (name == "mixed") return SpinEnsemble::maximally_mixed(layout);
  if (name == "random-pure") return random_pi_state(layout, PurityMode::HaarPure, seed);
  if (name == "random-mixed") return random_pi_state(layout, PurityMode::HilbertSchmidtMixed, seed);
  if (name == "dicke-mixture") return dicke_mixture_state(n, mix, seed);
  throw InputError("unknown state '" + name + "'");
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  int n = 0;
  std::string state = "ghz";
  std::string state_file;
  int k = -1;
  DickeMixtureParams mix;
  std::string settings;
  int random_settings = 0;
  std::int64_t shots = 1000;
  bool exact = false;
  std::string output;
  std::string truth_out;
};

int cmd_simulate(const SimulateArgs& a, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  SpinEnsemble state = [&] {
    if (!a.state_file.empty()) {
      auto e = ensemble_from_json(read_json_file(a.state_file), true, max_qubits_checked());
      if (a.n != 0 && a.n != e.n_qubits()) throw InputError("--n disagrees with the state file");
      return e;
    }
    if (a.n == 0) throw InputError("--n is required unless --state-file is given");
    check_n(a.n);
    return named_state(a.state, a.n, a.k, a.mix, seed);
  }();
  const int n = state.n_qubits();

  std::vector<Setting> settings;
  if (!a.settings.empty()) {
    settings = load_settings(a.settings, err);
  } else {
    Rng rng(seed ^ 0x5bd1e995ULL);
    settings = random_settings(a.random_settings > 0 ? a.random_settings : determined_setting_count(n), rng);
  }
  if (a.shots < 1) throw InputError("--shots must be positive");

  const Dataset data = a.exact ? exact_dataset(state, settings, a.shots)
                               : sample_dataset(state, settings, a.shots, seed);
  emit_json(dataset_to_json(data), a.output, out);
  if (!a.truth_out.empty()) write_json_file(a.truth_out, ensemble_to_json(state));
  return kOk;
}

// ---------------------------------------------------------------------------

struct ReconstructArgs {
  std::string data;
  std::string principle = "ml";
  double beta = 0.0;
  std::string algorithm = "barrier";
  int iters = 3000;
  std::string truth;
  std::string output;
  std::string trace;
  std::string iterate_trace;
  double weight_floor = 10.0;
  SolverConfig solver;
};

int cmd_reconstruct(const ReconstructArgs& a, bool verbose, std::ostream& out, std::ostream& err) {
  const Dataset data = dataset_from_json(read_json_file(a.data), max_qubits_checked());
  std::optional<SpinEnsemble> truth;
  if (!a.truth.empty()) {
    truth = ensemble_from_json(read_json_file(a.truth), true, max_qubits_checked());
    if (truth->n_qubits() != data.n_qubits) throw InputError("truth and dataset sizes differ");
  }

  if (a.algorithm == "fixed-point") {
    if (a.iters < 0) throw InputError("--iters must be non-negative");
    const FixedPointResult res = fixed_point_reconstruct(data, a.iters);
    if (!a.trace.empty()) {
      Csv csv(a.trace);
      csv.row("iteration", "fit_value");
      for (std::size_t i = 0; i < res.fit_trace.size(); ++i) csv.row(i, res.fit_trace[i]);
    }
    Json j = {{"algorithm", "fixed-point"},
              {"principle", "ml"},
              {"iterations", a.iters},
              {"estimate", ensemble_to_json(res.estimate)},
              {"fit_value", res.fit_trace.back()}};
    if (truth) j["trace_distance"] = trace_distance(res.estimate, *truth);
    emit_json(j, a.output, out);
    return kOk;
  }
  if (a.algorithm != "barrier") throw InputError("--algorithm must be barrier or fixed-point");

  FitSpec spec;
  spec.principle = parse_principle(a.principle);
  spec.beta = a.beta;
  spec.weight_floor_scale = a.weight_floor;
  if (spec.principle == FitPrinciple::HedgedMaxLik && !(a.beta > 0.0)) {
    throw InputError("--principle hedged needs --beta > 0");
  }
  const ReconstructionProblem problem(data, spec);

  std::unique_ptr<Csv> iter_csv;
  if (!a.iterate_trace.empty()) {
    iter_csv = std::make_unique<Csv>(a.iterate_trace);
    if (truth) {
      iter_csv->row("iteration", "t", "fit_value", "trace_distance");
    } else {
      iter_csv->row("iteration", "t", "fit_value");
    }
  }
  ReconstructionCallback cb;
  if (iter_csv || verbose) {
    cb = [&](double t, int it, const RealVector& x) {
      const double fit = problem.fit_value(x);
      if (verbose) err << "t=" << t << " iteration " << it << " fit " << fit << '\n';
      if (!iter_csv) return;
      if (truth) {
        iter_csv->row(it, t, fit, trace_distance(problem.parametrization().state(x), *truth));
      } else {
        iter_csv->row(it, t, fit);
      }
    };
  }
  const ReconstructionResult res = reconstruct(problem, a.solver, cb);

  if (!a.trace.empty()) {
    Csv csv(a.trace);
    if (truth) {
      csv.row("stage", "t", "iterations", "fit_value", "grad_norm", "trace_distance");
    } else {
      csv.row("stage", "t", "iterations", "fit_value", "grad_norm");
    }
    for (std::size_t s = 0; s < res.trace.size(); ++s) {
      const auto& st = res.trace[s];
      if (truth) {
        csv.row(s, st.t, st.iterations, st.fit_value, st.grad_norm,
                trace_distance(problem.parametrization().state(st.x), *truth));
      } else {
        csv.row(s, st.t, st.iterations, st.fit_value, st.grad_norm);
      }
    }
  }
  Json j = result_to_json(res, problem.spec());
  j["algorithm"] = "barrier";
  if (truth) j["trace_distance"] = trace_distance(res.estimate, *truth);
  emit_json(j, a.output, out);
  if (!res.converged) {
    for (const auto& st : res.trace) {
      if (!st.converged) err << "stage t=" << st.t << " did not converge: " << st.message << '\n';
    }
    return kNotConverged;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct PretestArgs {
  int n = 0;
  std::string target;
  std::string target_state = "dicke";
  int k = -1;
  std::string settings;
  std::string data;
  std::string witness;
  std::string witness_out;
  double epsilon = 0.0;
  double confidence = 0.95;
  double regularization = 1e-4;
};

int cmd_pretest(const PretestArgs& a, std::ostream& out, std::ostream& err) {
  PretestWitness witness;
  bool converged = true;
  std::optional<SpinEnsemble> target;
  if (!a.target.empty()) {
    target = ensemble_from_json(read_json_file(a.target), true, max_qubits_checked());
  } else if (a.witness.empty()) {
    if (a.n == 0) throw InputError("--n is required without --target or --witness");
    check_n(a.n);
    target = named_state(a.target_state, a.n, a.k, {}, 1);
  }

  out << std::setprecision(10);
  if (!a.witness.empty()) {
    witness = witness_from_json(read_json_file(a.witness));
  } else {
    const std::vector<Setting> settings = a.settings.empty() ? standard_settings() : load_settings(a.settings, err);
    PretestOptions opts;
    opts.regularization = a.regularization;
    const PretestResult res = optimize_witness(*target, settings, opts);
    witness = res.witness;
    converged = res.converged;
    out << "objective: " << res.objective << '\n';
    if (!res.converged) err << "witness optimization did not converge: " << res.message << '\n';
  }
  const Feasibility feas = witness_feasibility(witness);
  out << "max_slack_eigenvalue: " << feas.max_violation << '\n';
  for (std::size_t s = 0; s < witness.settings.size(); ++s) {
    const auto& ax = witness.settings[s].axis;
    out << "setting " << s << " [" << ax.x() << ", " << ax.y() << ", " << ax.z() << "]: z_min "
        << witness.z_min(static_cast<int>(s)) << " z_max " << witness.z_max(static_cast<int>(s)) << '\n';
  }
  out << "c_z_squared: " << witness.c_z_squared() << '\n';
  if (target) {
    if (target->n_qubits() != witness.n_qubits) throw InputError("target and witness sizes differ");
    out << "target_fidelity_bound: " << fidelity_bound(witness, *target) << '\n';
  }
  if (!a.data.empty()) {
    const Dataset data = dataset_from_json(read_json_file(a.data), max_qubits_checked());
    out << "data_fidelity_bound: " << fidelity_bound(witness, data) << '\n';
    if (!data.exact) {
      const double eps = a.epsilon > 0.0 ? a.epsilon
                                         : epsilon_for_confidence(witness, data.records.front().repetitions,
                                                                  a.confidence);
      const StatisticalBound sb = statistical_bound(witness, data, eps);
      out << "z_bar: " << sb.mean << '\n'
          << "epsilon: " << eps << '\n'
          << "bound: " << sb.bound << '\n'
          << "confidence: " << sb.confidence << '\n';
    }
  }
  if (!a.witness_out.empty()) write_json_file(a.witness_out, witness_to_json(witness));
  return converged ? kOk : kNotConverged;
}

// ---------------------------------------------------------------------------

struct DesignArgs {
  int n = 0;
  std::string target;
  int count = 0;
  std::string initial;
  DesignOptions options;
  double noise_constant = 1.0;
  std::string output;
  std::string trace;
};

int cmd_optimize_settings(const DesignArgs& a, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  SpinEnsemble target = [&] {
    if (!a.target.empty()) return ensemble_from_json(read_json_file(a.target), true, max_qubits_checked());
    if (a.n == 0) throw InputError("--n is required without --target");
    check_n(a.n);
    return SpinEnsemble::maximally_mixed(SpinSectorLayout(a.n));
  }();
  const int n = target.n_qubits();
  if (a.n != 0 && a.n != n) throw InputError("--n disagrees with the target file");
  const DesignProblem problem(n, target, a.noise_constant);

  DesignResult res = [&] {
    if (!a.initial.empty()) return optimize_settings(problem, load_settings(a.initial, err), seed, a.options);
    const int count = a.count > 0 ? a.count : determined_setting_count(n);
    return optimize_settings(problem, count, seed, a.options);
  }();
  if (!std::isfinite(res.total_error)) {
    try {
      total_error(problem, res.settings);
    } catch (const RankDeficientError& e) {
      throw InputError("design is rank deficient at weight " + std::to_string(e.weight()) + ": " + e.what());
    }
    throw InputError("design contains coinciding settings");
  }
  emit_json(settings_to_json(res.settings), a.output, out);
  if (!a.trace.empty()) {
    Csv csv(a.trace);
    csv.row("iteration", "total_error");
    for (const auto& p : res.trace) csv.row(p.proposal, p.total_error);
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct BenchmarkArgs {
  std::vector<int> n{8, 12};
  std::vector<std::string> principles{"ml", "ls"};
  std::int64_t shots = 1000;
  bool optimized = false;
  std::string output;
};

int cmd_benchmark(const BenchmarkArgs& a, std::uint64_t seed, bool verbose, std::ostream& out,
                  std::ostream& err) {
  for (int n : a.n) check_n(n);
  std::vector<FitPrinciple> principles;
  for (const auto& p : a.principles) principles.push_back(parse_principle(p));
  if (a.shots < 1) throw InputError("--shots must be positive");

  std::ostringstream table;
  table << std::setprecision(6);
  table << "n,principle,data,seconds,iterations,trace_distance,converged\n";
  bool all_converged = true;
  for (int n : a.n) {
    const SpinSectorLayout layout(n);
    Rng rng(seed + static_cast<std::uint64_t>(n));
    const SpinEnsemble truth = random_pi_state(layout, PurityMode::HaarPure, rng);
    std::vector<Setting> settings;
    if (a.optimized) {
      const DesignProblem dp(n, SpinEnsemble::maximally_mixed(layout));
      settings = optimize_settings(dp, determined_setting_count(n), seed).settings;
    } else {
      settings = random_settings(determined_setting_count(n), rng);
    }
    const Dataset exact = exact_dataset(truth, settings, a.shots);
    const Dataset sampled = sample_dataset(truth, settings, a.shots, rng);
    for (const auto p : principles) {
      for (const auto* data : {&exact, &sampled}) {
        FitSpec spec;
        spec.principle = p;
        if (p == FitPrinciple::HedgedMaxLik) spec.beta = 1e-4;
        const auto start = std::chrono::steady_clock::now();
        const ReconstructionResult res = reconstruct(*data, spec);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        all_converged = all_converged && res.converged;
        table << n << ',' << to_string(p) << ',' << (data->exact ? "exact" : "sampled") << ',' << secs << ','
              << res.total_iterations << ',' << trace_distance(res.estimate, truth) << ','
              << (res.converged ? "true" : "false") << '\n';
        if (verbose) err << "n=" << n << ' ' << to_string(p) << " done in " << secs << " s\n";
      }
    }
  }
  if (a.output.empty()) {
    out << table.str();
  } else {
    std::ofstream f(a.output);
    if (!f) throw InputError("cannot write '" + a.output + "'");
    f << table.str();
  }
  return all_converged ? kOk : kNotConverged;
}

void add_solver_options(CLI::App* cmd, SolverConfig& s) {
  cmd->add_option("--t0", s.t0, "initial barrier weight")->capture_default_str();
  cmd->add_option("--t-reduce", s.t_reduce, "barrier reduction factor per stage")->capture_default_str();
  cmd->add_option("--t-min", s.t_min, "final barrier weight")->capture_default_str();
  cmd->add_option("--grad-tol", s.newton.grad_tol, "Newton gradient tolerance")->capture_default_str();
  cmd->add_option("--decrement-tol", s.newton.decrement_tol, "stop a stage once half the squared Newton decrement is below this (0 disables)")
      ->capture_default_str();
  cmd->add_option("--max-newton-iters", s.newton.max_iters, "Newton iterations per stage")->capture_default_str();
  cmd->add_option("--ls-alpha", s.newton.ls_alpha, "Armijo parameter")->capture_default_str();
  cmd->add_option("--ls-shrink", s.newton.ls_shrink, "backtracking factor")->capture_default_str();
  cmd->add_flag("--abort-on-stage-failure", s.abort_on_stage_failure, "stop at the first failed stage");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Permutationally invariant state tomography", "pitomo"};
  app.set_config("--config", "", "read options from a TOML/INI file");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 1;
  bool verbose = false;
  app.add_option("--seed", seed, "random seed")->capture_default_str();
  app.add_flag("-v,--verbose", verbose, "progress messages on stderr");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "simulate a dataset");
  simulate->add_option("--n", sim.n, "number of qubits");
  simulate->add_option("--state", sim.state, "ghz|dicke|mixed|random-pure|random-mixed|dicke-mixture")
      ->capture_default_str();
  simulate->add_option("--state-file", sim.state_file, "ensemble JSON to simulate instead");
  simulate->add_option("--k", sim.k, "Dicke excitations (default N/2)");
  simulate->add_option("--p-asym", sim.mix.p_asym, "Dicke mixture asymmetry")->capture_default_str();
  simulate->add_option("--theta", sim.mix.theta, "Dicke mixture rotation angle")->capture_default_str();
  simulate->add_option("--noise-weight", sim.mix.noise_weight, "Dicke mixture noise weight")->capture_default_str();
  simulate->add_option("--settings", sim.settings, "settings JSON");
  simulate->add_option("--random-settings", sim.random_settings, "number of random settings");
  simulate->add_option("--shots", sim.shots, "repetitions per setting")->capture_default_str();
  simulate->add_flag("--exact", sim.exact, "frequencies equal to the exact probabilities");
  simulate->add_option("-o,--output", sim.output, "dataset file (stdout if omitted)");
  simulate->add_option("--truth-out", sim.truth_out, "write the simulated state here");

  ReconstructArgs rec;
  auto* reconstruct_cmd = app.add_subcommand("reconstruct", "estimate a state from a dataset");
  reconstruct_cmd->add_option("--data", rec.data, "dataset JSON")->required();
  reconstruct_cmd->add_option("--principle", rec.principle, "ml|ls|freels|hedged")->capture_default_str();
  reconstruct_cmd->add_option("--beta", rec.beta, "hedging strength");
  reconstruct_cmd->add_option("--algorithm", rec.algorithm, "barrier|fixed-point")->capture_default_str();
  reconstruct_cmd->add_option("--iters", rec.iters, "fixed-point iterations")->capture_default_str();
  reconstruct_cmd->add_option("--truth", rec.truth, "true ensemble for trace distances");
  reconstruct_cmd->add_option("-o,--output", rec.output, "result file (stdout if omitted)");
  reconstruct_cmd->add_option("--trace", rec.trace, "per-stage CSV trace");
  reconstruct_cmd->add_option("--iterate-trace", rec.iterate_trace, "per-iteration CSV trace");
  reconstruct_cmd->add_option("--weight-floor", rec.weight_floor, "least-squares weight floor scale")
      ->capture_default_str();
  add_solver_options(reconstruct_cmd, rec.solver);

  PretestArgs pre;
  auto* pretest = app.add_subcommand("pretest", "fidelity pretest");
  pretest->add_option("--n", pre.n, "number of qubits for a named target");
  pretest->add_option("--target", pre.target, "target ensemble JSON");
  pretest->add_option("--target-state", pre.target_state, "named target: dicke|ghz|...")->capture_default_str();
  pretest->add_option("--k", pre.k, "Dicke excitations (default N/2)");
  pretest->add_option("--settings", pre.settings, "settings JSON (default x, y, z)");
  pretest->add_option("--data", pre.data, "dataset to evaluate the witness on");
  pretest->add_option("--witness", pre.witness, "use this witness instead of optimizing");
  pretest->add_option("--witness-out", pre.witness_out, "write the witness here");
  pretest->add_option("--epsilon", pre.epsilon, "deviation for the statistical bound");
  pretest->add_option("--confidence", pre.confidence, "confidence used when --epsilon is absent")
      ->capture_default_str();
  pretest->add_option("--regularization", pre.regularization, "weight of the |z|^2 term")->capture_default_str();

  DesignArgs des;
  auto* design = app.add_subcommand("optimize-settings", "optimize measurement directions");
  design->add_option("--n", des.n, "number of qubits");
  design->add_option("--target", des.target, "target ensemble JSON (default totally mixed)");
  design->add_option("--count", des.count, "number of settings (default (N+2 choose 2))");
  design->add_option("--initial", des.initial, "initial settings JSON");
  design->add_option("--p-mix", des.options.p_mix, "weight of the old direction")->capture_default_str();
  design->add_option("--max-stall", des.options.max_stall, "stop after this many rejections")->capture_default_str();
  design->add_option("--max-proposals", des.options.max_proposals, "proposal budget")->capture_default_str();
  design->add_option("--noise-constant", des.noise_constant, "error scale K")->capture_default_str();
  design->add_option("-o,--output", des.output, "settings file (stdout if omitted)");
  design->add_option("--trace", des.trace, "CSV error trace");

  BenchmarkArgs bench;
  auto* benchmark = app.add_subcommand("benchmark", "timing table of the algorithm test");
  benchmark->add_option("--n", bench.n, "qubit numbers")->delimiter(',')->capture_default_str();
  benchmark->add_option("--principles", bench.principles, "principles")->delimiter(',')->capture_default_str();
  benchmark->add_option("--shots", bench.shots, "repetitions for sampled data")->capture_default_str();
  benchmark->add_flag("--optimized", bench.optimized, "use optimized instead of random settings");
  benchmark->add_option("-o,--output", bench.output, "CSV file (stdout if omitted)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*simulate) return cmd_simulate(sim, seed, out, err);
    if (*reconstruct_cmd) return cmd_reconstruct(rec, verbose, out, err);
    if (*pretest) return cmd_pretest(pre, out, err);
    if (*design) return cmd_optimize_settings(des, seed, out, err);
    if (*benchmark) return cmd_benchmark(bench, seed, verbose, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNotConverged;
  }
  return kInputError;
}

}  // namespace pitomo::cli
