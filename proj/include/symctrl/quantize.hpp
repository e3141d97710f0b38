/*
 * quantize.hpp
 *
 * Uniform lattices {k * spacing : k integer} restricted to a closed box, the
 * half-open cell quantizer, and the quantization-parameter inequalities.
 *
 * Cells are B(y) = prod_i [y_i - eta, y_i + eta[ with eta = spacing / 2, so
 * the cells of distinct lattice points never overlap and a point on a cell
 * boundary belongs to the cell on its right.
 */
#ifndef SYMCTRL_QUANTIZE_HPP_
#define SYMCTRL_QUANTIZE_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "symctrl/dynamics.hpp"

namespace symctrl {

class EmptyLatticeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using IntPoint = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

class Lattice {
 public:
  Lattice() = default;
  /* throws EmptyLatticeError if some axis holds no multiple of spacing */
  Lattice(Box box, double spacing);

  std::size_t dim() const { return box_.size(); }
  double spacing() const { return spacing_; }
  double eta() const { return spacing_ / 2; }
  const Box& box() const { return box_; }

  /* per-axis point counts and smallest integer coordinate */
  const std::vector<std::int64_t>& counts() const { return counts_; }
  const std::vector<std::int64_t>& first() const { return first_; }

  /* zero-dimensional lattices hold exactly one point, the empty vector */
  std::size_t size() const { return size_; }

  /* mixed-radix; the first axis is the most significant digit */
  IntPoint integer_coords(std::size_t index) const;
  std::optional<std::size_t> index_of(const IntPoint& k) const;
  Eigen::VectorXd point(std::size_t index) const;
  Eigen::VectorXd point(const IntPoint& k) const;

  /* integer coordinates of the cell containing x (no range check) */
  IntPoint cell_of(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /* index of the lattice point whose cell contains x, or nullopt when that
   * point lies outside the box */
  std::optional<std::size_t> quantize(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  friend bool operator==(const Lattice& a, const Lattice& b) {
    return a.spacing_ == b.spacing_ && a.box_ == b.box_;
  }

 private:
  Box box_;
  double spacing_ = 1.0;
  std::vector<std::int64_t> counts_;
  std::vector<std::int64_t> first_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 1;
};

Lattice lattice_points(const Box& box, double spacing);

/* lattice point whose cell contains x, or nullopt if out of range */
std::optional<Eigen::VectorXd> quantize_point(const Eigen::Ref<const Eigen::VectorXd>& x,
                                              const Lattice& lattice);

/*
 * Lattice points within eta (sup norm, closed) of the box, i.e. the points
 * whose closed cell meets it. Returned ascending. An empty box yields none.
 */
std::vector<std::size_t> initial_indices(const Lattice& lattice, const Box& init);

struct SynthesisParams {
  double epsilon = 0.0;
  double theta_p = 0.0;
  double theta_q = 0.0;
  double tau = 0.0;
  double eta = 0.0;
  double mu = 0.0;
  int substeps = kDefaultSubsteps;
};

void validate_positive(const SynthesisParams& params);

struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;

  double slack() const { return rhs - lhs; }
};

struct ValidationReport {
  InequalityCheck plant;          // beta_p(theta_p,tau) + gamma_p(mu) + eta <= theta_p
  InequalityCheck specification;  // beta_q(theta_q,tau) + eta <= theta_q
  InequalityCheck precision;      // theta_p + theta_q <= epsilon

  bool all_pass() const { return plant.pass && specification.pass && precision.pass; }
};

ValidationReport validate_parameters(const StabilityCertificate& cert_p,
                                     const StabilityCertificate& cert_q,
                                     const SynthesisParams& params);

}  // namespace symctrl

#endif  // SYMCTRL_QUANTIZE_HPP_
