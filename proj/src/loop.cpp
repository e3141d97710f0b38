#include "symctrl/loop.hpp"

#include <string>

namespace symctrl {

namespace {

Eigen::VectorXd step_flow(const ControlSystem& sys, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u, const SynthesisParams& params) {
  Eigen::ArrayXXd xb = x.transpose().array();
  Eigen::ArrayXXd ub = u.transpose().array();
  return flow_batch(sys, xb, ub, params.tau, params.substeps).row(0).transpose().matrix();
}

std::string describe(const Eigen::VectorXd& x) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? ", " : "") + std::to_string(x[i]);
  return s + ")";
}

}  // namespace

ClosedLoopTrace simulate_closed_loop(const ControlSystem& plant, const ControlSystem& spec,
                                     const Controller& ctrl,
                                     const Eigen::Ref<const Eigen::VectorXd>& x0,
                                     std::size_t steps, const SynthesisParams& params) {
  if (x0.size() != plant.n() || static_cast<std::size_t>(plant.n()) != ctrl.states.dim())
    throw std::invalid_argument("closed loop: dimension mismatch");
  const Lattice& lat = ctrl.states;
  const Eigen::VectorXd spec_u = Eigen::VectorXd::Zero(spec.m());

  ClosedLoopTrace trace;
  trace.input_dim = plant.m();
  Eigen::VectorXd x = x0;
  auto q0 = lat.quantize(x);
  if (!q0) throw UncontrolledStateError("x0 " + describe(x) + " quantizes outside the lattice", 0, trace);
  Eigen::VectorXd s = lat.point(*q0);

  std::optional<std::uint32_t> predicted;
  for (std::size_t k = 0;; ++k) {
    trace.states.push_back(x);
    trace.spec_states.push_back(s);
    trace.deviations.push_back((x - s).cwiseAbs().maxCoeff());
    if (k == steps) break;

    auto q = lat.quantize(x);
    std::optional<Transition> move;
    if (q) move = ctrl.lookup(static_cast<std::uint32_t>(*q));
    if (k == 0 && q && !std::binary_search(ctrl.initials.begin(), ctrl.initials.end(),
                                           static_cast<std::uint32_t>(*q)))
      move.reset();
    if (!move && predicted &&
        (x - lat.point(*predicted)).cwiseAbs().maxCoeff() <= params.theta_p) {
      move = ctrl.lookup(*predicted);
      if (move) ++trace.tracked_steps;
    }
    if (!move)
      throw UncontrolledStateError("uncontrolled state at step " + std::to_string(k) + ": x = " +
                                       describe(x),
                                   k, trace);
    trace.controller_states.push_back(move->source);
    Eigen::VectorXd u = ctrl.inputs.point(move->input);
    trace.inputs.push_back(u);
    predicted = move->target;
    x = step_flow(plant, x, u, params);
    s = step_flow(spec, s, spec_u, params);
  }
  return trace;
}

ConformanceReport conformance_report(const ClosedLoopTrace& trace, double eps) {
  ConformanceReport r;
  for (std::size_t k = 0; k < trace.deviations.size(); ++k)
    if (trace.deviations[k] > r.max_deviation || k == 0) {
      r.max_deviation = trace.deviations[k];
      r.argmax = k;
    }
  r.pass = r.max_deviation <= eps;
  return r;
}

}  // namespace symctrl
