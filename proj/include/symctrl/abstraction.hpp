/*
 * abstraction.hpp
 *
 * Symbolic models S_{tau,eta,mu}(Sigma): states are the points of the
 * lattice [X]_{2 eta}, inputs the points of [U]_{2 mu}, and (x,u) -> y
 * whenever the sampled flow from x under u ends in the cell of y.
 */
#ifndef SYMCTRL_ABSTRACTION_HPP_
#define SYMCTRL_ABSTRACTION_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "symctrl/dynamics.hpp"
#include "symctrl/quantize.hpp"
#include "symctrl/tsys.hpp"

namespace symctrl {

class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr std::uint64_t kDefaultTransitionCap = 100'000'000;

struct AbstractionSpec {
  double tau = 0.0;
  double eta = 0.0;
  std::optional<double> mu;  // absent: the only input is u = 0
  int substeps = kDefaultSubsteps;
};

struct Abstraction {
  Lattice states;
  Lattice inputs;
  /* state i is lattice point i, input j is input-lattice point j */
  FiniteSystem system;
};

/* the input lattice an abstraction uses for sys under spec */
Lattice input_lattice(const ControlSystem& sys, const AbstractionSpec& spec);

/*
 * Flows are evaluated in parallel (SYMCTRL_THREADS workers, default: all
 * hardware threads); the result does not depend on the worker count.
 */
Abstraction build_abstraction(const ControlSystem& sys, const AbstractionSpec& spec,
                              std::uint64_t transition_cap = kDefaultTransitionCap);

/* worker count from SYMCTRL_THREADS, falling back to the hardware */
unsigned worker_threads();

}  // namespace symctrl

#endif  // SYMCTRL_ABSTRACTION_HPP_
