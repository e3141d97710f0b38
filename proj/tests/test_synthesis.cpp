#include <random>

#include <doctest.h>

#include "support.hpp"
#include "symctrl/synthesis.hpp"

using namespace symctrl;
using testing::cube;
using testing::fields;

namespace {

ControlSystem plant_1d(const std::string& f, double ulo = -1, double uhi = 1) {
  return ControlSystem(cube(1, -1, 1), cube(1, -0.5, 0.5), cube(1, ulo, uhi), fields({f}, 1, 1),
                       StabilityCertificate{1, 1, 1, 1});
}

ControlSystem spec_1d(const std::string& f, double init = 0.5) {
  return ControlSystem(cube(1, -1, 1), cube(1, -init, init), {}, fields({f}, 1, 0),
                       StabilityCertificate{1, 1, 0, 1});
}

SynthesisOptions forced() {
  SynthesisOptions o;
  o.override_validation = true;
  return o;
}

/* structural properties every integrated controller must have */
void check_integrated(const IntegratedResult& r, const BaselineResult& b) {
  const Controller& c = r.controller;
  FiniteSystem sys = c.to_system();
  CHECK(is_deterministic(sys));
  CHECK(c.num_states() == c.transitions.size());
  for (std::size_t i = 1; i < c.transitions.size(); ++i)
    CHECK(c.transitions[i].source != c.transitions[i - 1].source);
  for (const auto& t : c.transitions) {
    CHECK(!std::binary_search(c.bad.begin(), c.bad.end(), t.source));
    CHECK(c.lookup(t.target));  // non-blocking
  }
  for (auto s : c.initials) CHECK(c.lookup(s));
  FiniteSystem ac = accessible_part(sys);
  CHECK(ac.num_states() == sys.num_states());
  CHECK(check_bisimulation(sys, b.controller.to_system(), 0.0));
  CHECK(r.metrics.states <= b.metrics.states);
  CHECK(r.metrics.memory_units == 3 * r.metrics.transitions + c.bad.size());
  CHECK(r.metrics.memory_units <= b.metrics.memory_units);
  const std::uint64_t nx = c.states.size(), nu = c.inputs.size();
  CHECK(r.metrics.steps <= nx * nu + nx * nx);
}

}  // namespace

TEST_CASE("backprop: chain, isolated state and fan-in") {
  {
    TransitionStore t(4);
    std::vector<char> bad(4, 0);
    t.add(0, 0, 1);
    t.add(1, 0, 2);
    t.add(2, 0, 3);
    nonblock_backprop(t, 3, bad);
    CHECK(t.size() == 0);
    CHECK(bad == std::vector<char>{1, 1, 1, 1});
  }
  {
    TransitionStore t(3);
    std::vector<char> bad(3, 0);
    t.add(0, 0, 1);
    nonblock_backprop(t, 2, bad);
    CHECK(t.size() == 1);
    CHECK(bad == std::vector<char>{0, 0, 1});
  }
  {
    TransitionStore t(5);
    std::vector<char> bad(5, 0);
    t.add(0, 0, 2);
    t.add(1, 0, 2);
    t.add(3, 1, 0);
    t.add(4, 0, 4);
    nonblock_backprop(t, 2, bad);
    CHECK(t.size() == 1);
    CHECK(t.has(4));
    CHECK(bad == std::vector<char>{1, 1, 1, 1, 0});
  }
}

TEST_CASE("memory arithmetic") {
  CHECK(compute_baseline_metrics(29820791, 29791, 1265217).memory_units == 93347397);
  CHECK(compute_baseline_metrics(2675069, 2601, 8013).memory_units == 8057049);
  CHECK(integrated_memory(239, 490) == 1207);
  CHECK(integrated_memory(99, 630) == 927);
  CHECK(integrated_memory(0, 0) == 0);
  CHECK(compute_baseline_metrics(0, 0, 0).memory_units == 0);
}

TEST_CASE("synthesis: random one-dimensional problems") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> a(0.3, 2.0), b(0.2, 1.5);
  SynthesisParams p{0.3, 0.15, 0.15, 0.5, 0.025, 0.05};
  int nonempty = 0;
  for (int k = 0; k < 15; ++k) {
    ControlSystem plant = plant_1d("-" + std::to_string(a(rng)) + "*x1 + " + std::to_string(b(rng)) + "*u1");
    ControlSystem spec = spec_1d("-" + std::to_string(a(rng)) + "*x1 + 0.3*sin(3*x1)");
    IntegratedResult r = synthesize_integrated(plant, spec, p, forced());
    BaselineResult base = synthesize_baseline(plant, spec, p, forced());
    check_integrated(r, base);
    if (!r.controller.empty()) ++nonempty;
  }
  CHECK(nonempty > 0);
}

TEST_CASE("synthesis: plant equal to the specification") {
  // with a single zero input both routes keep every state: no gain
  ControlSystem plant = plant_1d("-x1 + u1", 0, 0);
  ControlSystem spec(cube(1, -1, 1), cube(1, -1, 1), {}, fields({"-x1"}, 1, 0),
                     StabilityCertificate{1, 1, 0, 1});
  ControlSystem plant_all(cube(1, -1, 1), cube(1, -1, 1), cube(1, 0, 0), fields({"-x1 + u1"}, 1, 1),
                          StabilityCertificate{1, 1, 1, 1});
  SynthesisParams p{0.3, 0.15, 0.15, 0.5, 0.025, 0.05};
  IntegratedResult r = synthesize_integrated(plant_all, spec, p, forced());
  BaselineResult b = synthesize_baseline(plant_all, spec, p, forced());
  CHECK(r.metrics.states == 41);
  CHECK(r.metrics.transitions == b.metrics.transitions);
  CHECK(r.controller.bad.empty());
  check_integrated(r, b);

  // Nb(C*) is Nb(S_q) paired with itself
  Abstraction sq = build_abstraction(spec, {p.tau, p.eta, std::nullopt, p.substeps});
  FiniteSystem nbq = nonblocking_part(sq.system);
  CHECK(b.nonblocking.num_states() == nbq.num_states());
  CHECK(b.nonblocking.num_transitions() == nbq.num_transitions());
  for (auto l : b.nonblocking.labels()) CHECK((l >> 32) == (l & 0xffffffffu));
  (void)plant;
}

TEST_CASE("synthesis: validation gate") {
  ControlSystem plant = plant_1d("-x1 + u1");
  ControlSystem spec = spec_1d("-x1");
  SynthesisParams bad{0.1, 0.05, 0.05, 0.5, 0.025, 0.05};  // plant inequality fails
  CHECK_THROWS_AS(synthesize_integrated(plant, spec, bad), ValidationError);
  CHECK_THROWS_AS(synthesize_baseline(plant, spec, bad), ValidationError);
  CHECK_NOTHROW(synthesize_integrated(plant, spec, bad, forced()));

  SynthesisParams good{0.6, 0.3, 0.3, 1.0, 0.025, 0.05};
  CHECK_NOTHROW(synthesize_integrated(plant, spec, good));

  ControlSystem uncertified(cube(1, -1, 1), cube(1, -0.5, 0.5), {}, fields({"-x1"}, 1, 0));
  CHECK_THROWS_AS(synthesize_integrated(plant, uncertified, good), ValidationError);
  try {
    synthesize_integrated(plant, spec, bad);
  } catch (const ValidationError& e) {
    CHECK(!e.report().plant.pass);
    CHECK(e.report().precision.pass);
  }
}

TEST_CASE("synthesis: transition cap") {
  ControlSystem plant = plant_1d("-x1 + u1");
  ControlSystem spec = spec_1d("-x1");
  SynthesisParams p{0.6, 0.3, 0.3, 1.0, 0.025, 0.05};
  SynthesisOptions o;
  o.transition_cap = 10;
  CHECK_THROWS_AS(synthesize_baseline(plant, spec, p, o), ResourceLimitError);
}

TEST_CASE("synthesis: empty controller when nothing can be tracked") {
  // the plant cannot move at all, the specification always moves
  ControlSystem plant = plant_1d("0*u1");
  ControlSystem spec = spec_1d("-2*x1", 0.5);
  SynthesisParams p{0.6, 0.3, 0.3, 1.0, 0.025, 0.05};
  IntegratedResult r = synthesize_integrated(plant, spec, p, forced());
  // only the origin, a fixpoint of both, survives
  CHECK(r.controller.num_states() == 1);
  CHECK(r.controller.initials.size() == 1);

  ControlSystem drift = spec_1d("1", 0.5);
  IntegratedResult none = synthesize_integrated(plant, drift, p, forced());
  CHECK(none.controller.empty());
  CHECK(none.controller.initials.empty());
  CHECK(none.metrics.memory_units == none.controller.bad.size());
}
