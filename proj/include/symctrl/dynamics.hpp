/*
 * dynamics.hpp
 *
 * Continuous-time control systems xdot = f(x,u) over boxes, sampled flows
 * under piecewise-constant (zero-order hold) inputs, and incremental
 * stability certificates of the form
 *
 *   beta(r,s)  = beta_c * r * exp(-beta_lambda * s)
 *   gamma(r)   = gamma_a * r^gamma_p
 */
#ifndef SYMCTRL_DYNAMICS_HPP_
#define SYMCTRL_DYNAMICS_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "symctrl/expr.hpp"

namespace symctrl {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return lo <= v && v <= hi; }
  bool empty() const { return lo > hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/* axis-aligned closed box */
using Box = std::vector<Interval>;

bool box_contains(const Box& box, const Eigen::Ref<const Eigen::VectorXd>& x);
bool box_subset(const Box& inner, const Box& outer);
/* componentwise intersection; may contain empty intervals */
Box box_intersection(const Box& a, const Box& b);

struct StabilityCertificate {
  double beta_c = 1.0;
  double beta_lambda = 1.0;
  double gamma_a = 0.0;
  double gamma_p = 1.0;
};

void validate_certificate(const StabilityCertificate& cert);

double certificate_beta(const StabilityCertificate& cert, double r, double s);
double certificate_gamma(const StabilityCertificate& cert, double r);

/* flow left the representable range (overflow or NaN) */
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ControlSystem {
 public:
  /* input_box may be empty (m = 0) for autonomous systems */
  ControlSystem(Box state_box, Box init_box, Box input_box,
                std::vector<Expr> field,
                std::optional<StabilityCertificate> certificate = std::nullopt);

  int n() const { return static_cast<int>(state_box_.size()); }
  int m() const { return static_cast<int>(input_box_.size()); }

  const Box& state_box() const { return state_box_; }
  const Box& init_box() const { return init_box_; }
  const Box& input_box() const { return input_box_; }
  const std::vector<Expr>& field() const { return field_; }
  const std::optional<StabilityCertificate>& certificate() const {
    return certificate_;
  }
  const BatchProgram& program() const { return program_; }

 private:
  Box state_box_;
  Box init_box_;
  Box input_box_;
  std::vector<Expr> field_;
  std::optional<StabilityCertificate> certificate_;
  BatchProgram program_;
};

constexpr int kDefaultSubsteps = 50;

/*
 * Classical RK4 with h = tau/substeps and the input held constant. The raw
 * endpoint is returned even when it leaves the state box.
 */
Eigen::VectorXd flow(const ControlSystem& sys,
                     const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& u, double tau,
                     int substeps = kDefaultSubsteps);

/*
 * Batched flow: row i of the result is the flow from x.row(i) under u.row(i).
 * Every row is computed with exactly the arithmetic of flow(), so the two
 * agree bit for bit.
 */
Eigen::ArrayXXd flow_batch(const ControlSystem& sys, const Eigen::ArrayXXd& x,
                           const Eigen::ArrayXXd& u, double tau,
                           int substeps = kDefaultSubsteps);

}  // namespace symctrl

#endif  // SYMCTRL_DYNAMICS_HPP_
