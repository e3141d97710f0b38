/*
 * symctrl: command-line front end
 *
 *   symctrl validate-params <config>
 *   symctrl synthesize <config> --method integrated|baseline --out <file> [--force]
 *   symctrl simulate <config> <controller> --x0 v1,v2,.. --steps N --out <trace.csv>
 *   symctrl compare <config> [--force]
 *   symctrl abstract <config> --system plant|specification --out <file>
 *
 * exit status: 0 ok, 1 usage/config error, 2 parameter inequalities violated,
 * 3 empty controller, 4 resource cap, 5 closed-loop failure, 6 controllers
 * not bisimilar
 */
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "symctrl/abstraction.hpp"
#include "symctrl/io.hpp"
#include "symctrl/loop.hpp"
#include "symctrl/synthesis.hpp"

using namespace symctrl;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInvalid = 2, kEmpty = 3, kCap = 4, kLoop = 5, kNotBisimilar = 6 };

void print_report(const ValidationReport& r) {
  for (const auto* c : {&r.plant, &r.specification, &r.precision}) {
    std::fprintf(stderr, "%s  %s\n", c->pass ? "pass" : "FAIL", c->name.c_str());
    std::fprintf(stderr, "      lhs %.6g  rhs %.6g  slack %.6g\n", c->lhs, c->rhs, c->slack());
  }
}

int cmd_validate(const std::string& path) {
  ProblemConfig cfg = load_config(path);
  ValidationReport r = validate_parameters(
      cfg.plant.certificate().value_or(StabilityCertificate{}),
      cfg.specification.certificate().value_or(StabilityCertificate{}), cfg.params);
  if (!cfg.plant.certificate()) std::fprintf(stderr, "note: plant has no certificate, defaults used\n");
  if (!cfg.specification.certificate())
    std::fprintf(stderr, "note: specification has no certificate, defaults used\n");
  print_report(r);
  bool ok = r.all_pass() && cfg.plant.certificate() && cfg.specification.certificate();
  return ok ? kOk : kInvalid;
}

SynthesisOptions options_for(const ProblemConfig& cfg, bool force) {
  SynthesisOptions o = cfg.options;
  o.override_validation = o.override_validation || force;
  return o;
}

int cmd_synthesize(const std::string& path, const std::string& method, const std::string& out,
                   bool force) {
  ProblemConfig cfg = load_config(path);
  SynthesisOptions opts = options_for(cfg, force);
  Controller ctrl;
  Metrics metrics;
  if (method == "baseline") {
    BaselineResult r = synthesize_baseline(cfg.plant, cfg.specification, cfg.params, opts);
    const auto& d = r.details;
    std::fprintf(stderr, "S_p      %llu states, %llu transitions\n",
                 (unsigned long long)d.plant_states, (unsigned long long)d.plant_transitions);
    std::fprintf(stderr, "S_q      %llu states, %llu transitions\n",
                 (unsigned long long)d.spec_states, (unsigned long long)d.spec_transitions);
    std::fprintf(stderr, "C*       %llu states (%llu with moves), %llu transitions\n",
                 (unsigned long long)d.composed_states, (unsigned long long)d.composed_active_states,
                 (unsigned long long)d.composed_transitions);
    std::fprintf(stderr, "Nb(C*)   %llu states, %llu transitions\n",
                 (unsigned long long)d.nonblocking_states,
                 (unsigned long long)d.nonblocking_transitions);
    ctrl = std::move(r.controller);
    metrics = r.metrics;
  } else {
    IntegratedResult r = synthesize_integrated(cfg.plant, cfg.specification, cfg.params, opts);
    const auto& d = r.details;
    std::fprintf(stderr, "X0       %llu states\n", (unsigned long long)d.initial_states);
    std::fprintf(stderr, "C**      %llu states, %llu transitions\n",
                 (unsigned long long)r.metrics.states, (unsigned long long)r.metrics.transitions);
    std::fprintf(stderr, "Bad      %llu states\n", (unsigned long long)d.bad_states);
    ctrl = std::move(r.controller);
    metrics = r.metrics;
  }
  std::fprintf(stderr, "memory   %llu units, %llu steps, %.1f ms\n",
               (unsigned long long)metrics.memory_units, (unsigned long long)metrics.steps,
               metrics.wall_time_ms);
  save_controller(out, ctrl);
  std::cout << metrics_json(metrics) << std::endl;
  if (ctrl.initials.empty()) {
    std::fprintf(stderr, "empty controller: no initial state survives\n");
    return kEmpty;
  }
  return kOk;
}

Eigen::VectorXd parse_vector(const std::string& text, int dim) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double d = 0;
    try {
      d = std::stod(item, &used);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--x0", "not a number: " + item);
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos)
      throw CLI::ValidationError("--x0", "not a number: " + item);
    v.push_back(d);
  }
  if (static_cast<int>(v.size()) != dim)
    throw CLI::ValidationError("--x0", "expected " + std::to_string(dim) + " components");
  return Eigen::Map<Eigen::VectorXd>(v.data(), dim);
}

int cmd_simulate(const std::string& path, const std::string& ctrl_path, const std::string& x0_text,
                 std::size_t steps, const std::string& out) {
  ProblemConfig cfg = load_config(path);
  Controller ctrl = load_controller(ctrl_path);
  if (ctrl.states.dim() != static_cast<std::size_t>(cfg.plant.n()))
    throw CLI::ValidationError("controller", "dimension does not match the config");
  Eigen::VectorXd x0 = parse_vector(x0_text, cfg.plant.n());
  // the initial cell may straddle the box edge, so points within eta count
  for (std::size_t i = 0; i < cfg.plant.init_box().size(); ++i) {
    const auto& iv = cfg.plant.init_box()[i];
    double slack = 1e-9 * std::max(1.0, iv.hi - iv.lo);
    if (!(iv.lo - slack <= x0[static_cast<Eigen::Index>(i)] &&
          x0[static_cast<Eigen::Index>(i)] <= iv.hi + slack))
      throw CLI::ValidationError("--x0", "outside the plant initial box");
  }

  ClosedLoopTrace trace;
  int status = kOk;
  try {
    trace = simulate_closed_loop(cfg.plant, cfg.specification, ctrl, x0, steps, cfg.params);
  } catch (const UncontrolledStateError& ex) {
    std::fprintf(stderr, "%s\n", ex.what());
    trace = ex.partial();
    status = kLoop;
  }
  std::ofstream csv(out);
  if (!csv) throw std::runtime_error("cannot write " + out);
  write_trace_csv(csv, trace);

  ConformanceReport rep = conformance_report(trace, cfg.params.epsilon);
  std::fprintf(stderr, "max deviation %.6g at step %zu (epsilon %.6g): %s\n", rep.max_deviation,
               rep.argmax, cfg.params.epsilon, rep.pass ? "conforms" : "VIOLATION");
  if (trace.tracked_steps)
    std::fprintf(stderr, "controller continued from its own state on %zu step(s)\n",
                 trace.tracked_steps);
  if (!rep.pass) status = kLoop;
  std::printf("%s\n", status == kOk ? "pass" : "fail");
  return status;
}

double ratio(double a, double b) { return b == 0 ? 0.0 : a / b; }

int cmd_compare(const std::string& path, bool force) {
  ProblemConfig cfg = load_config(path);
  SynthesisOptions opts = options_for(cfg, force);
  IntegratedResult in = synthesize_integrated(cfg.plant, cfg.specification, cfg.params, opts);
  std::printf("integrated  states %llu  transitions %llu  memory %llu  steps %llu\n",
              (unsigned long long)in.metrics.states, (unsigned long long)in.metrics.transitions,
              (unsigned long long)in.metrics.memory_units, (unsigned long long)in.metrics.steps);
  std::fflush(stdout);
  BaselineResult base;
  try {
    base = synthesize_baseline(cfg.plant, cfg.specification, cfg.params, opts);
  } catch (const ResourceLimitError& ex) {
    std::printf("baseline    aborted: %s\n", ex.what());
    return kCap;
  }
  const Metrics& b = base.metrics;
  const Metrics& i = in.metrics;
  std::printf("baseline    states %llu  transitions %llu  memory %llu  steps %llu\n",
              (unsigned long long)b.states, (unsigned long long)b.transitions,
              (unsigned long long)b.memory_units, (unsigned long long)b.steps);
  std::printf("ratio       states %.2f  transitions %.2f  memory %.4f  steps %.4f  time %.3f\n",
              ratio(i.states, b.states), ratio(i.transitions, b.transitions),
              ratio(i.memory_units, b.memory_units), ratio(i.steps, b.steps),
              ratio(i.wall_time_ms, b.wall_time_ms));
  bool bisimilar =
      check_bisimulation(in.controller.to_system(), base.controller.to_system(), 0.0).has_value();
  std::printf("bisimulation C** ~ Nb(C*): %s\n", bisimilar ? "holds" : "FAILS");
  return bisimilar ? kOk : kNotBisimilar;
}

int cmd_abstract(const std::string& path, const std::string& which, const std::string& out) {
  ProblemConfig cfg = load_config(path);
  const bool plant = which == "plant";
  const ControlSystem& sys = plant ? cfg.plant : cfg.specification;
  AbstractionSpec spec{cfg.params.tau, cfg.params.eta,
                       plant ? std::optional<double>(cfg.params.mu) : std::nullopt,
                       cfg.params.substeps};
  Abstraction a = build_abstraction(sys, spec, cfg.options.transition_cap);
  Controller c;
  c.states = a.states;
  c.inputs = a.inputs;
  c.transitions = a.system.transitions();
  c.initials = a.system.initials();
  save_controller(out, c);
  std::fprintf(stderr, "%zu states, %zu transitions\n", a.system.num_states(),
               a.system.num_transitions());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic controller synthesis for sampled nonlinear systems"};
  app.require_subcommand(1);

  std::string config, controller, out, method = "integrated", x0, system = "plant";
  std::size_t steps = 20;
  bool force = false;

  auto* validate = app.add_subcommand("validate-params", "Check the quantization inequalities");
  validate->add_option("config", config, "Problem config (JSON)")->required();

  auto* synth = app.add_subcommand("synthesize", "Synthesize a controller");
  synth->add_option("config", config, "Problem config (JSON)")->required();
  synth->add_option("--method", method, "integrated or baseline")
      ->check(CLI::IsMember({"integrated", "baseline"}));
  synth->add_option("--out", out, "Controller file to write")->required();
  synth->add_flag("--force", force, "Proceed even if the inequalities fail");

  auto* sim = app.add_subcommand("simulate", "Run the closed loop and check conformance");
  sim->add_option("config", config, "Problem config (JSON)")->required();
  sim->add_option("controller", controller, "Controller file")->required();
  sim->add_option("--x0", x0, "Initial state, comma separated")->required();
  sim->add_option("--steps", steps, "Sampling periods to simulate");
  sim->add_option("--out", out, "Trace CSV to write")->required();

  auto* cmp = app.add_subcommand("compare", "Run both methods and compare");
  cmp->add_option("config", config, "Problem config (JSON)")->required();
  cmp->add_flag("--force", force, "Proceed even if the inequalities fail");

  auto* abs = app.add_subcommand("abstract", "Export a symbolic model in controller format");
  abs->add_option("config", config, "Problem config (JSON)")->required();
  abs->add_option("--system", system, "plant or specification")
      ->check(CLI::IsMember({"plant", "specification"}));
  abs->add_option("--out", out, "File to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*validate) return cmd_validate(config);
    if (*synth) return cmd_synthesize(config, method, out, force);
    if (*sim) return cmd_simulate(config, controller, x0, steps, out);
    if (*cmp) return cmd_compare(config, force);
    if (*abs) return cmd_abstract(config, system, out);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    print_report(e.report());
    std::fprintf(stderr, "rerun with --force or options.override_validation to proceed\n");
    return kInvalid;
  } catch (const ResourceLimitError& e) {
    std::fprintf(stderr, "resource limit: %s\n", e.what());
    return kCap;
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
