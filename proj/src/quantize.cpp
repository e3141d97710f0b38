#include "symctrl/quantize.hpp"

#include <cmath>

namespace symctrl {

namespace {

/* absorbs representation error of box bounds such as 0.25 + 0.01 vs 13*0.02 */
constexpr double kIndexSlack = 1e-9;

std::int64_t ceil_index(double v) { return static_cast<std::int64_t>(std::ceil(v - kIndexSlack)); }
std::int64_t floor_index(double v) { return static_cast<std::int64_t>(std::floor(v + kIndexSlack)); }

}  // namespace

Lattice::Lattice(Box box, double spacing) : box_(std::move(box)), spacing_(spacing) {
  if (!(spacing_ > 0) || !std::isfinite(spacing_))
    throw std::invalid_argument("lattice spacing must be positive");
  counts_.resize(box_.size());
  first_.resize(box_.size());
  stride_.resize(box_.size());
  for (std::size_t i = 0; i < box_.size(); ++i) {
    const auto& iv = box_[i];
    if (iv.empty()) throw EmptyLatticeError("empty box on axis " + std::to_string(i + 1));
    std::int64_t lo = ceil_index(iv.lo / spacing_);
    std::int64_t hi = floor_index(iv.hi / spacing_);
    if (hi < lo)
      throw EmptyLatticeError("no lattice point on axis " + std::to_string(i + 1));
    first_[i] = lo;
    counts_[i] = hi - lo + 1;
  }
  size_ = 1;
  for (std::size_t i = box_.size(); i-- > 0;) {
    stride_[i] = size_;
    size_ *= static_cast<std::size_t>(counts_[i]);
  }
}

IntPoint Lattice::integer_coords(std::size_t index) const {
  IntPoint k(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) {
    k[static_cast<Eigen::Index>(i)] =
        first_[i] + static_cast<std::int64_t>(index / stride_[i]);
    index %= stride_[i];
  }
  return k;
}

std::optional<std::size_t> Lattice::index_of(const IntPoint& k) const {
  if (static_cast<std::size_t>(k.size()) != dim()) return std::nullopt;
  std::size_t index = 0;
  for (std::size_t i = 0; i < dim(); ++i) {
    std::int64_t offset = k[static_cast<Eigen::Index>(i)] - first_[i];
    if (offset < 0 || offset >= counts_[i]) return std::nullopt;
    index += static_cast<std::size_t>(offset) * stride_[i];
  }
  return index;
}

Eigen::VectorXd Lattice::point(const IntPoint& k) const {
  return k.cast<double>() * spacing_;
}

Eigen::VectorXd Lattice::point(std::size_t index) const {
  return point(integer_coords(index));
}

IntPoint Lattice::cell_of(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  IntPoint k(x.size());
  const double half = eta();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    k[i] = static_cast<std::int64_t>(std::floor((x[i] + half) / spacing_));
  return k;
}

std::optional<std::size_t> Lattice::quantize(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != dim())
    throw std::invalid_argument("quantize: dimension mismatch");
  if (!x.allFinite()) return std::nullopt;
  return index_of(cell_of(x));
}

Lattice lattice_points(const Box& box, double spacing) { return Lattice(box, spacing); }

std::optional<Eigen::VectorXd> quantize_point(const Eigen::Ref<const Eigen::VectorXd>& x,
                                              const Lattice& lattice) {
  auto index = lattice.quantize(x);
  if (!index) return std::nullopt;
  return lattice.point(*index);
}

std::vector<std::size_t> initial_indices(const Lattice& lattice, const Box& init) {
  if (init.size() != lattice.dim())
    throw std::invalid_argument("initial_indices: dimension mismatch");
  std::vector<std::int64_t> lo(init.size()), hi(init.size());
  const double s = lattice.spacing();
  for (std::size_t i = 0; i < init.size(); ++i) {
    if (init[i].empty()) return {};
    lo[i] = std::max(ceil_index((init[i].lo - lattice.eta()) / s), lattice.first()[i]);
    hi[i] = std::min(floor_index((init[i].hi + lattice.eta()) / s),
                     lattice.first()[i] + lattice.counts()[i] - 1);
    if (hi[i] < lo[i]) return {};
  }
  std::vector<std::size_t> out;
  IntPoint k(static_cast<Eigen::Index>(init.size()));
  for (std::size_t i = 0; i < init.size(); ++i) k[static_cast<Eigen::Index>(i)] = lo[i];
  // odometer over the sub-box; ascending in mixed-radix order
  for (;;) {
    out.push_back(*lattice.index_of(k));
    std::size_t axis = init.size();
    while (axis-- > 0) {
      auto a = static_cast<Eigen::Index>(axis);
      if (k[a] < hi[axis]) {
        ++k[a];
        break;
      }
      k[a] = lo[axis];
    }
    if (axis == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

void validate_positive(const SynthesisParams& p) {
  if (!(p.epsilon > 0 && p.theta_p > 0 && p.theta_q > 0 && p.tau > 0 && p.eta > 0 && p.mu > 0))
    throw std::invalid_argument("synthesis parameters must all be strictly positive");
  if (p.substeps < 1) throw std::invalid_argument("substeps must be positive");
}

ValidationReport validate_parameters(const StabilityCertificate& cert_p,
                                     const StabilityCertificate& cert_q,
                                     const SynthesisParams& params) {
  // equalities count as satisfied up to rounding of the decimal inputs
  auto check = [](std::string name, double lhs, double rhs) {
    double tol = 1e-12 * std::max(1.0, std::abs(rhs));
    return InequalityCheck{std::move(name), lhs, rhs, lhs <= rhs + tol};
  };
  ValidationReport r;
  r.plant = check("plant: beta_p(theta_p,tau) + gamma_p(mu) + eta <= theta_p",
                  certificate_beta(cert_p, params.theta_p, params.tau) +
                      certificate_gamma(cert_p, params.mu) + params.eta,
                  params.theta_p);
  r.specification = check("specification: beta_q(theta_q,tau) + eta <= theta_q",
                          certificate_beta(cert_q, params.theta_q, params.tau) + params.eta,
                          params.theta_q);
  r.precision = check("precision: theta_p + theta_q <= epsilon",
                      params.theta_p + params.theta_q, params.epsilon);
  return r;
}

}  // namespace symctrl
