/*
 * loop.hpp
 *
 * Closed-loop execution of a plant under a symbolic controller: sample,
 * quantize, look up the controller move, hold its input for one period.
 * The specification reference runs alongside from the quantized initial
 * state and the sampled deviation between the two is recorded.
 */
#ifndef SYMCTRL_LOOP_HPP_
#define SYMCTRL_LOOP_HPP_

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "symctrl/dynamics.hpp"
#include "symctrl/quantize.hpp"
#include "symctrl/synthesis.hpp"

namespace symctrl {

struct ClosedLoopTrace {
  std::vector<Eigen::VectorXd> states;       // x_0 .. x_N
  std::vector<Eigen::VectorXd> inputs;       // u_0 .. u_{N-1}
  std::vector<Eigen::VectorXd> spec_states;  // s_0 .. s_N
  std::vector<double> deviations;            // |x_k - s_k|_inf
  std::vector<std::uint32_t> controller_states;
  int input_dim = 0;
  /* steps where the cell of x_k had no move and the controller continued
   * from its own successor state, which lay within theta_p of x_k */
  std::size_t tracked_steps = 0;
};

class UncontrolledStateError : public std::runtime_error {
 public:
  UncontrolledStateError(const std::string& what, std::size_t step, ClosedLoopTrace partial)
      : std::runtime_error(what), step_(step), partial_(std::move(partial)) {}
  std::size_t step() const { return step_; }
  const ClosedLoopTrace& partial() const { return partial_; }

 private:
  std::size_t step_;
  ClosedLoopTrace partial_;
};

ClosedLoopTrace simulate_closed_loop(const ControlSystem& plant, const ControlSystem& spec,
                                     const Controller& ctrl,
                                     const Eigen::Ref<const Eigen::VectorXd>& x0,
                                     std::size_t steps, const SynthesisParams& params);

struct ConformanceReport {
  double max_deviation = 0.0;
  std::size_t argmax = 0;
  bool pass = true;
};

ConformanceReport conformance_report(const ClosedLoopTrace& trace, double eps);

}  // namespace symctrl

#endif  // SYMCTRL_LOOP_HPP_
