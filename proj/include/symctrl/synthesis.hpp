/*
 * synthesis.hpp
 *
 * Controller synthesis for a plant P and a specification Q sharing an output
 * space. Two routes produce exactly bisimilar controllers:
 *
 *   baseline    build S_p and S_q, compose exactly, keep Nb(S_p ||_0 S_q)
 *   integrated  explore the shared lattice from the initial states, pairing
 *               each specification move with the first plant input that
 *               reproduces it, and back-propagate failures into Bad
 */
#ifndef SYMCTRL_SYNTHESIS_HPP_
#define SYMCTRL_SYNTHESIS_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "symctrl/abstraction.hpp"
#include "symctrl/dynamics.hpp"
#include "symctrl/quantize.hpp"
#include "symctrl/tsys.hpp"

namespace symctrl {

class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, ValidationReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/*
 * States and targets index the shared state lattice, inputs index the plant
 * input lattice. Transitions are kept sorted by (source, input, target).
 */
struct Controller {
  Lattice states;
  Lattice inputs;
  std::vector<Transition> transitions;
  std::vector<std::uint32_t> initials;
  std::vector<std::uint32_t> bad;

  /* distinct source states */
  std::size_t num_states() const;
  bool empty() const { return transitions.empty(); }
  /* first transition leaving s in (input, target) order */
  std::optional<Transition> lookup(std::uint32_t s) const;
  /* explicit system over the source and target states, outputs at the
   * lattice points, labels equal to lattice indices */
  FiniteSystem to_system() const;

  friend bool operator==(const Controller&, const Controller&) = default;
};

struct Metrics {
  std::uint64_t states = 0;
  std::uint64_t transitions = 0;
  std::uint64_t memory_units = 0;
  std::uint64_t steps = 0;
  double wall_time_ms = 0.0;
};

struct SynthesisOptions {
  bool override_validation = false;
  std::uint64_t transition_cap = kDefaultTransitionCap;
};

struct BaselineDetails {
  std::uint64_t plant_states = 0, plant_transitions = 0;
  std::uint64_t spec_states = 0, spec_transitions = 0;
  std::uint64_t composed_states = 0;         // output-compatible pairs
  std::uint64_t composed_active_states = 0;  // pairs with an outgoing transition
  std::uint64_t composed_transitions = 0;
  std::uint64_t nonblocking_states = 0, nonblocking_transitions = 0;
};

struct BaselineResult {
  Controller controller;
  Metrics metrics;
  BaselineDetails details;
  FiniteSystem nonblocking;  // Nb(C*) with composed labels
};

struct IntegratedDetails {
  std::uint64_t initial_states = 0;
  std::uint64_t processed_states = 0;
  std::uint64_t inputs_examined = 0;
  std::uint64_t spec_flows = 0;
  std::uint64_t plant_flows = 0;  // including chunk overrun
  std::uint64_t backprop_work = 0;
  std::uint64_t bad_states = 0;
};

struct IntegratedResult {
  Controller controller;
  Metrics metrics;
  IntegratedDetails details;
};

/* the lattice both routes use: X_p intersected with X_q at spacing 2 eta */
Lattice shared_lattice(const ControlSystem& plant, const ControlSystem& spec,
                       const SynthesisParams& params);

/* lattice points near both initial boxes, ascending */
std::vector<std::uint32_t> shared_initials(const Lattice& lattice, const ControlSystem& plant,
                                           const ControlSystem& spec);

/* throws ValidationError unless the inequalities hold or are overridden */
ValidationReport check_preconditions(const ControlSystem& plant, const ControlSystem& spec,
                                     const SynthesisParams& params,
                                     const SynthesisOptions& options);

BaselineResult synthesize_baseline(const ControlSystem& plant, const ControlSystem& spec,
                                   const SynthesisParams& params,
                                   const SynthesisOptions& options = {});

IntegratedResult synthesize_integrated(const ControlSystem& plant, const ControlSystem& spec,
                                       const SynthesisParams& params,
                                       const SynthesisOptions& options = {});

/*
 * Transition store with exactly one outgoing transition per source, as
 * maintained by the integrated route.
 */
class TransitionStore {
 public:
  explicit TransitionStore(std::size_t num_states);

  void add(std::uint32_t source, std::uint32_t input, std::uint32_t target);
  bool has(std::uint32_t source) const { return active_[source] != 0; }
  std::optional<Transition> get(std::uint32_t source) const;
  void remove(std::uint32_t source);
  /* sources whose current transition ends in target */
  std::vector<std::uint32_t> predecessors(std::uint32_t target) const;

  std::size_t size() const { return count_; }
  std::vector<Transition> sorted() const;

 private:
  std::vector<std::uint32_t> input_;
  std::vector<std::uint32_t> target_;
  std::vector<char> active_;
  std::vector<std::vector<std::uint32_t>> preds_;
  std::size_t count_ = 0;
};

/*
 * Moves x and, transitively, every source whose transition leads into a
 * state moved, into bad, deleting those transitions. Returns the work done
 * (transitions deleted plus states moved).
 */
std::uint64_t nonblock_backprop(TransitionStore& store, std::uint32_t x,
                                std::vector<char>& bad);

Metrics compute_baseline_metrics(std::uint64_t plant_transitions, std::uint64_t spec_transitions,
                                 std::uint64_t composed_transitions);
std::uint64_t integrated_memory(std::uint64_t transitions, std::uint64_t bad_states);

}  // namespace symctrl

#endif  // SYMCTRL_SYNTHESIS_HPP_
