/*
 * acceptance.cpp
 *
 * Runs the reference experiments end to end and prints one PASS/FAIL line
 * per acceptance criterion. Exit status is the number of failed criteria.
 */
#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "symctrl/io.hpp"
#include "symctrl/loop.hpp"
#include "symctrl/synthesis.hpp"

using namespace symctrl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double peak_rss_gb() {
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  return static_cast<double>(ru.ru_maxrss) / (1024.0 * 1024.0);
}

bool within(double value, double expected, double rel) {
  return std::abs(value - expected) <= rel * expected;
}

std::string config_path(const std::string& name) {
  return std::string(SYMCTRL_CONFIG_DIR) + "/" + name + ".json";
}

struct Instance {
  std::string name;
  ProblemConfig cfg;
  IntegratedResult integrated;
  std::optional<BaselineResult> baseline;
  double integrated_s = 0, baseline_s = 0;
};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& why) {
    if (!ok) {
      if (!pass) detail << "; ";
      pass = false;
      detail << why;
    }
  }
};

int failures = 0;

void report(int id, const std::string& title, Outcome& o, const std::string& summary) {
  if (!o.pass) ++failures;
  std::printf("criterion %d %s: %s (%s%s%s)\n", id, o.pass ? "PASS" : "FAIL", title.c_str(),
              summary.c_str(), o.pass ? "" : "; ", o.pass ? "" : o.detail.str().c_str());
  std::fflush(stdout);
}

Instance run(const std::string& name, bool with_baseline) {
  Instance in{name, load_config(config_path(name)), {}, std::nullopt};
  SynthesisOptions opts = in.cfg.options;
  opts.override_validation = true;
  auto t0 = Clock::now();
  in.integrated = synthesize_integrated(in.cfg.plant, in.cfg.specification, in.cfg.params, opts);
  in.integrated_s = seconds_since(t0);
  if (with_baseline) {
    t0 = Clock::now();
    in.baseline = synthesize_baseline(in.cfg.plant, in.cfg.specification, in.cfg.params, opts);
    in.baseline_s = seconds_since(t0);
  }
  std::fprintf(stderr, "%s: C** %llu states (%.1f s)", name.c_str(),
               static_cast<unsigned long long>(in.integrated.metrics.states), in.integrated_s);
  if (in.baseline)
    std::fprintf(stderr, ", Nb(C*) %llu states / %llu transitions (%.1f s)",
                 static_cast<unsigned long long>(in.baseline->metrics.states),
                 static_cast<unsigned long long>(in.baseline->metrics.transitions), in.baseline_s);
  std::fprintf(stderr, "\n");
  return in;
}

/* ---- criterion 7 ---- */

bool in_box(const Eigen::VectorXd& x, const Box& box) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto& iv = box[static_cast<std::size_t>(i)];
    if (x[i] < iv.lo - 1e-9 || x[i] > iv.hi + 1e-9) return false;
  }
  return true;
}

struct LoopStats {
  std::size_t runs = 0, uncontrolled = 0, violations = 0;
  double worst = 0;
};

void run_loop(const Instance& in, const Controller& c, const Eigen::VectorXd& x0, LoopStats& st) {
  ++st.runs;
  try {
    ClosedLoopTrace t = simulate_closed_loop(in.cfg.plant, in.cfg.specification, c, x0, 20, in.cfg.params);
    ConformanceReport r = conformance_report(t, in.cfg.params.epsilon);
    st.worst = std::max(st.worst, r.max_deviation);
    if (!r.pass) ++st.violations;
  } catch (const UncontrolledStateError&) {
    ++st.uncontrolled;
  }
}

/* up to count controller initials inside the initial box, evenly spread */
std::vector<Eigen::VectorXd> pick_initials(const Controller& c, const Box& init, std::size_t count) {
  std::vector<Eigen::VectorXd> inside;
  for (auto s : c.initials) {
    Eigen::VectorXd x = c.states.point(s);
    if (in_box(x, init)) inside.push_back(x);
  }
  if (inside.size() <= count) return inside;
  std::vector<Eigen::VectorXd> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(inside[k * inside.size() / count]);
  return out;
}

/* ---- criterion 8 ---- */

bool prop_determinism() {
  std::mt19937_64 rng(101);
  for (int k = 0; k < 50; ++k) {
    ControlSystem sys = testing::random_control_system(rng);
    Abstraction a = build_abstraction(sys, {0.4, 0.1, 0.25, 20});
    if (!is_deterministic(a.system)) return false;
  }
  return true;
}

bool prop_partition() {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  Lattice lat(testing::cube(3, -1, 1), 1.0 / 15);
  for (int k = 0; k < 1000; ++k) {
    Eigen::VectorXd x(3);
    for (int i = 0; i < 3; ++i) x[i] = coord(rng);
    auto q = lat.quantize(x);
    if (!q) return false;
    int hits = 0;
    for (std::size_t idx = 0; idx < lat.size(); ++idx) {
      Eigen::VectorXd d = x - lat.point(idx);
      bool in = true;
      for (int i = 0; i < 3; ++i) in = in && d[i] >= -lat.eta() && d[i] < lat.eta();
      if (in) {
        ++hits;
        if (idx != *q) return false;
      }
    }
    if (hits != 1) return false;
  }
  return true;
}

bool prop_nb_ac() {
  std::mt19937_64 rng(107);
  for (int k = 0; k < 100; ++k) {
    FiniteSystem s = testing::random_system(rng, 1, 12, 2, 0.2);
    FiniteSystem nb = nonblocking_part(s), ac = accessible_part(s);
    if (nonblocking_part(nb).transitions() != nb.transitions()) return false;
    if (nonblocking_part(nb).labels() != nb.labels()) return false;
    if (accessible_part(ac).labels() != ac.labels()) return false;
    std::vector<char> kept(s.num_states(), 0);
    for (auto l : nb.labels()) kept[l] = 1;
    for (std::uint32_t d = 0; d < s.num_states(); ++d) {
      if (kept[d]) continue;
      auto with = kept;
      with[d] = 1;
      auto labels = nonblocking_part(s.restrict_to(with)).labels();
      if (std::find(labels.begin(), labels.end(), d) != labels.end()) return false;
    }
  }
  return true;
}

bool prop_composition() {
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> eps(0.0, 1.2);
  for (int k = 0; k < 100; ++k) {
    FiniteSystem a = testing::random_system(rng, 1 + k % 2), b = testing::random_system(rng, 1 + k % 2);
    double e = k % 4 == 0 ? 0.0 : eps(rng);
    FiniteSystem c = compose(a, b, e);
    auto rel = check_simulation(c, b, e);
    if (!rel || !is_simulation_relation(c, b, *rel, e)) return false;
  }
  return true;
}

}  // namespace

int main() {
  /* 1: lattice cardinalities */
  {
    Outcome o;
    auto t0 = Clock::now();
    Lattice states(testing::cube(3, -1, 1), 1.0 / 15);
    Lattice inputs(testing::cube(1, -1, 1), 0.002);
    double s = seconds_since(t0);
    o.require(states.size() == 29791, "state lattice " + std::to_string(states.size()));
    o.require(inputs.size() == 1001, "input lattice " + std::to_string(inputs.size()));
    o.require(s < 1.0, "runtime");
    report(1, "lattice cardinalities", o,
           std::to_string(states.size()) + " and " + std::to_string(inputs.size()) + " points");
  }

  std::vector<Instance> linear;
  for (int k = 1; k <= 8; ++k) linear.push_back(run("linear_" + std::to_string(k), true));
  Instance nonlinear = run("nonlinear", true);
  const double rss = peak_rss_gb();

  /* 2: abstraction counts of the nonlinear example */
  {
    Outcome o;
    const BaselineDetails& d = nonlinear.baseline->details;
    o.require(d.plant_states == 29791, "S_p states " + std::to_string(d.plant_states));
    o.require(within(static_cast<double>(d.plant_transitions), 29820791, 0.001),
              "S_p transitions " + std::to_string(d.plant_transitions));
    o.require(d.spec_states == 29791 && d.spec_transitions == 29791, "S_q counts");
    o.require(nonlinear.baseline_s <= 600, "runtime");
    o.require(rss <= 3.0, "memory");
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "S_p %llu/%llu, S_q %llu/%llu, deviation %.4f%%, baseline leg %.0f s, peak %.2f GB",
                  static_cast<unsigned long long>(d.plant_states),
                  static_cast<unsigned long long>(d.plant_transitions),
                  static_cast<unsigned long long>(d.spec_states),
                  static_cast<unsigned long long>(d.spec_transitions),
                  100.0 * (static_cast<double>(d.plant_transitions) - 29820791) / 29820791,
                  nonlinear.baseline_s, rss);
    report(2, "abstraction counts", o, buf);
  }

  /* 3: memory arithmetic */
  {
    Outcome o;
    auto nl = compute_baseline_metrics(29820791, 29791, 1265217).memory_units;
    auto ex1 = compute_baseline_metrics(2675069, 2601, 8013).memory_units;
    auto cc = integrated_memory(239, 490);
    o.require(nl == 93347397, "nonlinear " + std::to_string(nl));
    o.require(ex1 == 8057049, "example 1 " + std::to_string(ex1));
    o.require(cc == 1207, "C** " + std::to_string(cc));
    report(3, "memory arithmetic", o,
           std::to_string(nl) + ", " + std::to_string(ex1) + ", " + std::to_string(cc));
  }

  /* 4: linear examples */
  {
    Outcome o;
    const int cc[8] = {239, 281, 199, 277, 99, 109, 81, 53};
    const int nb[8] = {403, 521, 343, 499, 99, 129, 153, 65};
    std::ostringstream sum;
    for (int k = 0; k < 8; ++k) {
      const Instance& in = linear[static_cast<std::size_t>(k)];
      const Metrics& m = in.integrated.metrics;
      const Metrics& b = in.baseline->metrics;
      std::string tag = "#" + std::to_string(k + 1);
      o.require(within(static_cast<double>(m.states), cc[k], 0.02), tag + " C** " + std::to_string(m.states));
      o.require(within(static_cast<double>(b.states), nb[k], 0.02), tag + " Nb " + std::to_string(b.states));
      o.require(m.transitions == m.states, tag + " transitions != states");
      o.require(in.integrated_s + in.baseline_s <= 60, tag + " runtime");
      sum << (k ? ", " : "") << tag << " " << m.states << "/" << b.states;
    }
    report(4, "linear synthesis", o, sum.str());
  }

  /* 5: nonlinear synthesis */
  {
    Outcome o;
    const Metrics& m = nonlinear.integrated.metrics;
    const Metrics& b = nonlinear.baseline->metrics;
    double ratio = static_cast<double>(m.states) / static_cast<double>(b.states);
    o.require(within(static_cast<double>(m.states), 3152, 0.05), "C** states");
    o.require(within(static_cast<double>(b.states), 21894, 0.05), "Nb states");
    o.require(within(static_cast<double>(b.transitions), 1265217, 0.05), "Nb transitions");
    o.require(ratio >= 0.10 && ratio <= 0.20, "ratio");
    o.require(nonlinear.baseline_s <= 1800, "baseline runtime");
    char buf[200];
    std::snprintf(buf, sizeof buf, "C** %llu, Nb(C*) %llu/%llu, ratio %.3f",
                  static_cast<unsigned long long>(m.states), static_cast<unsigned long long>(b.states),
                  static_cast<unsigned long long>(b.transitions), ratio);
    report(5, "nonlinear synthesis", o, buf);
  }

  std::vector<Instance*> all;
  for (auto& in : linear) all.push_back(&in);
  all.push_back(&nonlinear);

  /* 6: exact bisimilarity and minimality */
  {
    Outcome o;
    for (const Instance* in : all) {
      const Controller& c = in->integrated.controller;
      const Controller& b = in->baseline->controller;
      o.require(check_bisimulation(c.to_system(), b.to_system(), 0.0).has_value(), in->name + " not bisimilar");
      o.require(c.num_states() <= b.num_states(), in->name + " larger than Nb(C*)");
    }
    report(6, "oracle equivalence", o, std::to_string(all.size()) + " instances");
  }

  /* 7: closed-loop conformance */
  {
    Outcome o;
    LoopStats st;
    for (const Instance* in : all) {
      for (const Controller* c : {&in->integrated.controller, &in->baseline->controller}) {
        auto starts = pick_initials(*c, in->cfg.plant.init_box(), 12);
        o.require(starts.size() >= 10, in->name + " has fewer than 10 initial states in X0");
        for (const auto& x0 : starts) run_loop(*in, *c, x0, st);
      }
    }
    /* corner trajectory of the nonlinear example: start at (-1,-1,-1+4eta), or
     * at the first controller initial above it along x3 if that cell is in Bad */
    const Controller& nc = nonlinear.integrated.controller;
    const double eta = nonlinear.cfg.params.eta;
    std::string corner = "corner start not controlled";
    for (int k = 4; k <= 30; k += 2) {
      Eigen::VectorXd x0(3);
      x0 << -1, -1, -1 + k * eta;
      auto s = nc.states.quantize(x0);
      if (!s || !std::binary_search(nc.initials.begin(), nc.initials.end(), static_cast<std::uint32_t>(*s)))
        continue;
      corner = "corner start x3 = -1+" + std::to_string(k) + "eta";
      for (const Controller* c : {&nc, static_cast<const Controller*>(&nonlinear.baseline->controller)}) run_loop(nonlinear, *c, x0, st);
      break;
    }
    o.require(st.uncontrolled == 0, std::to_string(st.uncontrolled) + " uncontrolled");
    o.require(st.violations == 0, std::to_string(st.violations) + " runs above epsilon");
    char buf[200];
    std::snprintf(buf, sizeof buf, "%zu runs of 20 steps, worst deviation %.4f, %s", st.runs, st.worst,
                  corner.c_str());
    report(7, "closed-loop conformance", o, buf);
  }

  /* 8: property suites */
  {
    Outcome o;
    o.require(prop_determinism(), "determinism");
    o.require(prop_partition(), "partition");
    o.require(prop_nb_ac(), "Nb/Ac");
    o.require(prop_composition(), "composition simulation");
    report(8, "property suites", o, "50 abstractions, 1000 points, 100 systems, 100 triples");
  }

  /* 9: complexity counters */
  {
    Outcome o;
    for (const Instance* in : all) {
      const Controller& c = in->integrated.controller;
      const std::uint64_t nx = c.states.size(), nu = c.inputs.size();
      o.require(in->integrated.metrics.memory_units <= in->baseline->metrics.memory_units,
                in->name + " memory");
      o.require(in->integrated.metrics.steps <= nx * nu + nx * nx, in->name + " steps");
    }
    report(9, "complexity counters", o, std::to_string(all.size()) + " instances");
  }

  return failures;
}
