#include "symctrl/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <deque>

namespace symctrl {

namespace {

/* plant inputs tried per batched flow in the integrated input scan */
constexpr Eigen::Index kInputChunk = 64;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_shared_space(const ControlSystem& plant, const ControlSystem& spec) {
  if (plant.n() != spec.n())
    throw std::invalid_argument("plant and specification must share the state dimension");
}

std::vector<std::uint32_t> to_u32(const std::vector<std::size_t>& v) {
  return std::vector<std::uint32_t>(v.begin(), v.end());
}

std::vector<std::uint32_t> intersect_sorted(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b) {
  std::vector<std::uint32_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

/* ---- Controller ---- */

std::size_t Controller::num_states() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < transitions.size(); ++i)
    if (i == 0 || transitions[i].source != transitions[i - 1].source) ++count;
  return count;
}

std::optional<Transition> Controller::lookup(std::uint32_t s) const {
  auto it = std::lower_bound(transitions.begin(), transitions.end(), Transition{s, 0, 0});
  if (it == transitions.end() || it->source != s) return std::nullopt;
  return *it;
}

FiniteSystem Controller::to_system() const {
  std::vector<std::uint32_t> ids;
  for (const auto& t : transitions) {
    ids.push_back(t.source);
    ids.push_back(t.target);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto local = [&](std::uint32_t s) {
    return static_cast<std::uint32_t>(std::lower_bound(ids.begin(), ids.end(), s) - ids.begin());
  };
  Eigen::MatrixXd outs(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(states.dim()));
  std::vector<std::uint64_t> labels(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    outs.row(static_cast<Eigen::Index>(i)) = states.point(ids[i]).transpose();
    labels[i] = ids[i];
  }
  std::vector<std::uint32_t> inits;
  for (auto s : initials)
    if (std::binary_search(ids.begin(), ids.end(), s)) inits.push_back(local(s));
  std::vector<Transition> trans;
  trans.reserve(transitions.size());
  for (const auto& t : transitions) trans.push_back({local(t.source), t.input, local(t.target)});
  return FiniteSystem(std::move(outs), std::move(inits), static_cast<std::uint32_t>(inputs.size()),
                      std::move(trans), std::move(labels));
}

/* ---- shared pieces ---- */

Lattice shared_lattice(const ControlSystem& plant, const ControlSystem& spec,
                       const SynthesisParams& params) {
  check_shared_space(plant, spec);
  return Lattice(box_intersection(plant.state_box(), spec.state_box()), 2 * params.eta);
}

std::vector<std::uint32_t> shared_initials(const Lattice& lattice, const ControlSystem& plant,
                                           const ControlSystem& spec) {
  return intersect_sorted(to_u32(initial_indices(lattice, plant.init_box())),
                          to_u32(initial_indices(lattice, spec.init_box())));
}

ValidationReport check_preconditions(const ControlSystem& plant, const ControlSystem& spec,
                                     const SynthesisParams& params,
                                     const SynthesisOptions& options) {
  check_shared_space(plant, spec);
  validate_positive(params);
  ValidationReport report = validate_parameters(plant.certificate().value_or(StabilityCertificate{}),
                                                spec.certificate().value_or(StabilityCertificate{}),
                                                params);
  if (options.override_validation) return report;
  if (!plant.certificate() || !spec.certificate())
    throw ValidationError("both systems need a stability certificate", report);
  if (!report.all_pass()) {
    std::string failed;
    for (const auto* c : {&report.plant, &report.specification, &report.precision})
      if (!c->pass) failed += (failed.empty() ? "" : "; ") + c->name;
    throw ValidationError("parameter inequalities violated: " + failed, report);
  }
  return report;
}

Metrics compute_baseline_metrics(std::uint64_t plant_transitions, std::uint64_t spec_transitions,
                                 std::uint64_t composed_transitions) {
  Metrics m;
  m.memory_units = 3 * (plant_transitions + spec_transitions + composed_transitions);
  return m;
}

std::uint64_t integrated_memory(std::uint64_t transitions, std::uint64_t bad_states) {
  return 3 * transitions + bad_states;
}

/* ---- baseline ---- */

BaselineResult synthesize_baseline(const ControlSystem& plant, const ControlSystem& spec,
                                   const SynthesisParams& params,
                                   const SynthesisOptions& options) {
  check_preconditions(plant, spec, params, options);
  const auto start = Clock::now();
  BaselineResult res;
  auto& d = res.details;

  Abstraction sp = build_abstraction(plant, {params.tau, params.eta, params.mu, params.substeps},
                                     options.transition_cap);
  Abstraction sq = build_abstraction(spec, {params.tau, params.eta, std::nullopt, params.substeps},
                                     options.transition_cap);
  d.plant_states = sp.system.num_states();
  d.plant_transitions = sp.system.num_transitions();
  d.spec_states = sq.system.num_states();
  d.spec_transitions = sq.system.num_transitions();

  ComposeStats cstats;
  FiniteSystem composed = compose(sp.system, sq.system, 0.0, &cstats);
  if (composed.num_transitions() > options.transition_cap)
    throw ResourceLimitError("composition exceeds the transition cap");
  d.composed_states = composed.num_states();
  d.composed_active_states = composed.num_active_states();
  d.composed_transitions = composed.num_transitions();

  res.nonblocking = nonblocking_part(composed);
  d.nonblocking_states = res.nonblocking.num_states();
  d.nonblocking_transitions = res.nonblocking.num_transitions();

  // project (p, q) with identical outputs onto the shared lattice
  Controller& c = res.controller;
  c.states = shared_lattice(plant, spec, params);
  c.inputs = sp.inputs;
  const FiniteSystem& nb = res.nonblocking;
  std::vector<std::uint32_t> to_shared(nb.num_states());
  for (std::uint32_t i = 0; i < nb.num_states(); ++i) {
    auto p = static_cast<std::size_t>(nb.labels()[i] >> 32);
    auto idx = c.states.index_of(sp.states.integer_coords(p));
    if (!idx) throw std::logic_error("composed state outside the shared lattice");
    to_shared[i] = static_cast<std::uint32_t>(*idx);
  }
  const std::uint32_t spec_inputs = sq.system.num_inputs();
  for (const auto& t : nb.transitions())
    c.transitions.push_back({to_shared[t.source], t.input / spec_inputs, to_shared[t.target]});
  std::sort(c.transitions.begin(), c.transitions.end());
  for (auto s : nb.initials()) c.initials.push_back(to_shared[s]);
  std::sort(c.initials.begin(), c.initials.end());

  Metrics m = compute_baseline_metrics(d.plant_transitions, d.spec_transitions,
                                       d.composed_transitions);
  m.states = d.nonblocking_states;
  m.transitions = d.nonblocking_transitions;
  // flows, pair checks in the composition, and the pruning sweep
  m.steps = d.plant_states * sp.inputs.size() + d.spec_states + cstats.pair_checks +
            d.composed_transitions + d.composed_states;
  m.wall_time_ms = elapsed_ms(start);
  res.metrics = m;
  return res;
}

/* ---- integrated ---- */

TransitionStore::TransitionStore(std::size_t num_states)
    : input_(num_states), target_(num_states), active_(num_states, 0), preds_(num_states) {}

void TransitionStore::add(std::uint32_t source, std::uint32_t input, std::uint32_t target) {
  if (active_[source]) throw std::logic_error("source already has a transition");
  input_[source] = input;
  target_[source] = target;
  active_[source] = 1;
  preds_[target].push_back(source);
  ++count_;
}

std::optional<Transition> TransitionStore::get(std::uint32_t source) const {
  if (!active_[source]) return std::nullopt;
  return Transition{source, input_[source], target_[source]};
}

void TransitionStore::remove(std::uint32_t source) {
  if (!active_[source]) return;
  active_[source] = 0;
  --count_;
}

std::vector<std::uint32_t> TransitionStore::predecessors(std::uint32_t target) const {
  std::vector<std::uint32_t> out;
  for (auto z : preds_[target])
    if (active_[z] && target_[z] == target) out.push_back(z);
  return out;
}

std::vector<Transition> TransitionStore::sorted() const {
  std::vector<Transition> out;
  out.reserve(count_);
  for (std::uint32_t s = 0; s < active_.size(); ++s)
    if (active_[s]) out.push_back({s, input_[s], target_[s]});
  return out;
}

std::uint64_t nonblock_backprop(TransitionStore& store, std::uint32_t x,
                                std::vector<char>& bad) {
  std::uint64_t work = 0;
  std::deque<std::uint32_t> badx{x};
  while (!badx.empty()) {
    auto y = badx.front();
    badx.pop_front();
    for (auto z : store.predecessors(y)) {
      store.remove(z);
      ++work;
      badx.push_back(z);
    }
    store.remove(y);
    if (!bad[y]) {
      bad[y] = 1;
      ++work;
    }
  }
  return work;
}

IntegratedResult synthesize_integrated(const ControlSystem& plant, const ControlSystem& spec,
                                       const SynthesisParams& params,
                                       const SynthesisOptions& options) {
  check_preconditions(plant, spec, params, options);
  const auto start = Clock::now();
  IntegratedResult res;
  auto& d = res.details;

  Controller& c = res.controller;
  c.states = shared_lattice(plant, spec, params);
  c.inputs = input_lattice(plant, {params.tau, params.eta, params.mu, params.substeps});
  const Lattice& lat = c.states;
  const std::size_t nx = lat.size();
  const auto nu = static_cast<Eigen::Index>(c.inputs.size());
  if (nx >= UINT32_MAX) throw ResourceLimitError("shared lattice too large to index");

  Eigen::ArrayXXd plant_inputs(nu, plant.m());
  for (Eigen::Index j = 0; j < nu; ++j)
    plant_inputs.row(j) = c.inputs.point(static_cast<std::size_t>(j)).transpose().array();
  const Eigen::ArrayXXd spec_input = Eigen::ArrayXXd::Zero(1, spec.m());

  std::vector<std::uint32_t> x0 = shared_initials(lat, plant, spec);
  d.initial_states = x0.size();

  TransitionStore store(nx);
  std::vector<char> bad(nx, 0), enqueued(nx, 0);
  std::deque<std::uint32_t> frontier;
  for (auto s : x0) {
    enqueued[s] = 1;
    frontier.push_back(s);
  }

  Eigen::ArrayXXd xrow(1, plant.n()), xs, us, zs;
  Eigen::VectorXd z(plant.n());
  while (!frontier.empty()) {
    const std::uint32_t x = frontier.front();
    frontier.pop_front();
    if (store.has(x) || bad[x]) continue;
    ++d.processed_states;

    xrow.row(0) = lat.point(x).transpose().array();
    Eigen::ArrayXXd ys = flow_batch(spec, xrow, spec_input, params.tau, params.substeps);
    ++d.spec_flows;
    Eigen::VectorXd yv = ys.row(0).transpose().matrix();
    std::optional<std::size_t> y = lat.quantize(yv);

    bool matched = false;
    if (y && !bad[*y]) {
      for (Eigen::Index begin = 0; begin < nu && !matched; begin += kInputChunk) {
        const Eigen::Index rows = std::min(kInputChunk, nu - begin);
        xs = xrow.replicate(rows, 1);
        us = plant_inputs.middleRows(begin, rows);
        zs = flow_batch(plant, xs, us, params.tau, params.substeps);
        d.plant_flows += static_cast<std::uint64_t>(rows);
        for (Eigen::Index r = 0; r < rows; ++r) {
          ++d.inputs_examined;
          z = zs.row(r).transpose().matrix();
          auto q = lat.quantize(z);
          if (q && *q == *y) {
            store.add(x, static_cast<std::uint32_t>(begin + r), static_cast<std::uint32_t>(*y));
            matched = true;
            break;
          }
        }
      }
    }
    if (matched) {
      if (!enqueued[*y]) {
        enqueued[*y] = 1;
        frontier.push_back(static_cast<std::uint32_t>(*y));
      }
    } else {
      d.backprop_work += nonblock_backprop(store, x, bad);
    }
  }

  c.transitions = store.sorted();
  for (std::uint32_t s = 0; s < nx; ++s)
    if (bad[s]) c.bad.push_back(s);
  for (auto s : x0)
    if (store.has(s)) c.initials.push_back(s);
  d.bad_states = c.bad.size();

  Metrics& m = res.metrics;
  m.states = c.num_states();
  m.transitions = c.transitions.size();
  m.memory_units = integrated_memory(m.transitions, d.bad_states);
  m.steps = d.inputs_examined + d.spec_flows + d.backprop_work;
  m.wall_time_ms = elapsed_ms(start);
  return res;
}

}  // namespace symctrl
