#include "symctrl/dynamics.hpp"

#include <cmath>

namespace symctrl {

namespace {

void check_box(const Box& box, const char* what) {
  for (const auto& iv : box)
    if (!(iv.lo <= iv.hi))
      throw std::invalid_argument(std::string(what) + ": lower bound exceeds upper bound");
}

/* lattice points are computed as k*spacing and may sit an ulp outside */
constexpr double kBoxSlack = 1e-9;

bool box_contains_slack(const Box& box, const Eigen::Ref<const Eigen::VectorXd>& x) {
  for (std::size_t i = 0; i < box.size(); ++i) {
    double tol = kBoxSlack * std::max(1.0, std::abs(box[i].hi - box[i].lo));
    if (!(box[i].lo - tol <= x[i] && x[i] <= box[i].hi + tol)) return false;
  }
  return true;
}

}  // namespace

bool box_contains(const Box& box, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (static_cast<Eigen::Index>(box.size()) != x.size()) return false;
  for (std::size_t i = 0; i < box.size(); ++i)
    if (!box[i].contains(x[static_cast<Eigen::Index>(i)])) return false;
  return true;
}

bool box_subset(const Box& inner, const Box& outer) {
  if (inner.size() != outer.size()) return false;
  for (std::size_t i = 0; i < inner.size(); ++i)
    if (inner[i].lo < outer[i].lo || inner[i].hi > outer[i].hi) return false;
  return true;
}

Box box_intersection(const Box& a, const Box& b) {
  if (a.size() != b.size()) throw std::invalid_argument("box_intersection: dimension mismatch");
  Box out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = {std::max(a[i].lo, b[i].lo), std::min(a[i].hi, b[i].hi)};
  return out;
}

void validate_certificate(const StabilityCertificate& c) {
  if (!(c.beta_c > 0) || !(c.beta_lambda > 0) || !(c.gamma_a >= 0) || !(c.gamma_p > 0))
    throw std::invalid_argument(
        "certificate requires beta_c > 0, beta_lambda > 0, gamma_a >= 0, gamma_p > 0");
}

double certificate_beta(const StabilityCertificate& cert, double r, double s) {
  return cert.beta_c * r * std::exp(-cert.beta_lambda * s);
}

double certificate_gamma(const StabilityCertificate& cert, double r) {
  if (r == 0.0) return 0.0;
  return cert.gamma_a * std::pow(r, cert.gamma_p);
}

ControlSystem::ControlSystem(Box state_box, Box init_box, Box input_box,
                             std::vector<Expr> field,
                             std::optional<StabilityCertificate> certificate)
    : state_box_(std::move(state_box)),
      init_box_(std::move(init_box)),
      input_box_(std::move(input_box)),
      field_(std::move(field)),
      certificate_(certificate) {
  if (state_box_.empty()) throw std::invalid_argument("state box must have dimension >= 1");
  check_box(state_box_, "state box");
  check_box(init_box_, "initial box");
  check_box(input_box_, "input box");
  if (!box_subset(init_box_, state_box_))
    throw std::invalid_argument("initial box must be contained in the state box");
  if (field_.size() != state_box_.size())
    throw std::invalid_argument("vector field needs one expression per state");
  for (const auto& e : field_)
    if (e.state_dim() != n() || e.input_dim() != m())
      throw std::invalid_argument("vector field expression declared with wrong dimensions");
  if (certificate_) validate_certificate(*certificate_);
  program_ = BatchProgram(field_);
}

Eigen::ArrayXXd flow_batch(const ControlSystem& sys, const Eigen::ArrayXXd& x,
                           const Eigen::ArrayXXd& u, double tau, int substeps) {
  if (!(tau > 0)) throw std::invalid_argument("flow: tau must be positive");
  if (substeps < 1) throw std::invalid_argument("flow: substeps must be positive");
  if (x.cols() != sys.n() || u.cols() != sys.m() || u.rows() != x.rows())
    throw std::invalid_argument("flow: dimension mismatch");

  const double h = tau / substeps;
  const BatchProgram& f = sys.program();
  Eigen::ArrayXXd state = x;
  Eigen::ArrayXXd k1, k2, k3, k4, probe;
  for (int step = 0; step < substeps; ++step) {
    f.eval(state, u, k1);
    probe = state + (h / 2) * k1;
    f.eval(probe, u, k2);
    probe = state + (h / 2) * k2;
    f.eval(probe, u, k3);
    probe = state + h * k3;
    f.eval(probe, u, k4);
    state = state + (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!state.allFinite()) {
    Eigen::Index row = 0;
    while (row < state.rows() && state.row(row).allFinite()) ++row;
    std::string msg = "flow diverged from x = (";
    for (Eigen::Index i = 0; i < x.cols(); ++i)
      msg += (i ? ", " : "") + std::to_string(x(row, i));
    msg += ") under u = (";
    for (Eigen::Index i = 0; i < u.cols(); ++i)
      msg += (i ? ", " : "") + std::to_string(u(row, i));
    throw DivergenceError(msg + ")");
  }
  return state;
}

Eigen::VectorXd flow(const ControlSystem& sys,
                     const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& u, double tau,
                     int substeps) {
  if (x.size() != sys.n() || u.size() != sys.m())
    throw std::invalid_argument("flow: dimension mismatch");
  if (!box_contains_slack(sys.state_box(), x))
    throw std::invalid_argument("flow: initial state outside the state box");
  if (!box_contains_slack(sys.input_box(), u))
    throw std::invalid_argument("flow: input outside the input box");
  Eigen::ArrayXXd xb = x.transpose().array();
  Eigen::ArrayXXd ub = u.transpose().array();
  return flow_batch(sys, xb, ub, tau, substeps).row(0).transpose().matrix();
}

}  // namespace symctrl
