/*
 * tsys.hpp
 *
 * Explicit finite transition systems with outputs in R^n (sup-norm metric),
 * approximate composition, non-blocking and accessible parts, and checkers
 * for approximate simulation and bisimulation relations.
 */
#ifndef SYMCTRL_TSYS_HPP_
#define SYMCTRL_TSYS_HPP_

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace symctrl {

struct Transition {
  std::uint32_t source = 0;
  std::uint32_t input = 0;
  std::uint32_t target = 0;

  friend auto operator<=>(const Transition&, const Transition&) = default;
};

using StatePair = std::pair<std::uint32_t, std::uint32_t>;
using Relation = std::vector<StatePair>;

class FiniteSystem {
 public:
  FiniteSystem() = default;

  /*
   * outputs: one row per state. Transitions are sorted and deduplicated.
   * labels tag each state with an identifier that survives sub-system
   * operators; they default to the state indices.
   */
  FiniteSystem(Eigen::MatrixXd outputs, std::vector<std::uint32_t> initials,
               std::uint32_t num_inputs, std::vector<Transition> transitions,
               std::vector<std::uint64_t> labels = {});

  std::size_t num_states() const { return static_cast<std::size_t>(outputs_.rows()); }
  std::uint32_t num_inputs() const { return num_inputs_; }
  std::size_t num_transitions() const { return transitions_.size(); }
  int output_dim() const { return static_cast<int>(outputs_.cols()); }

  const Eigen::MatrixXd& outputs() const { return outputs_; }
  auto output(std::uint32_t s) const { return outputs_.row(s); }
  const std::vector<std::uint32_t>& initials() const { return initials_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<std::uint64_t>& labels() const { return labels_; }

  /* outgoing transitions of s, sorted by (input, target) */
  std::span<const Transition> out(std::uint32_t s) const {
    return {transitions_.data() + offsets_[s], transitions_.data() + offsets_[s + 1]};
  }

  /* number of states with at least one outgoing transition */
  std::size_t num_active_states() const;

  bool is_initial(std::uint32_t s) const;

  /* keep the given states (any order; duplicates ignored) and every
   * transition between them */
  FiniteSystem restrict_to(const std::vector<char>& keep) const;

 private:
  Eigen::MatrixXd outputs_;
  std::vector<std::uint32_t> initials_;
  std::uint32_t num_inputs_ = 0;
  std::vector<Transition> transitions_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint64_t> labels_;
};

/* states whose output rows lie within eps in the sup norm, sorted */
Relation compatible_pairs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double eps);

struct ComposeStats {
  std::uint64_t pair_checks = 0;
};

/*
 * Approximate composition S1 ||_eps S2. Composed state i carries label
 * (s1 << 32) | s2; composed input is u1 * |U2| + u2; the output is H1.
 */
FiniteSystem compose(const FiniteSystem& s1, const FiniteSystem& s2, double eps,
                     ComposeStats* stats = nullptr);

FiniteSystem nonblocking_part(const FiniteSystem& s);
FiniteSystem accessible_part(const FiniteSystem& s);

/* maximal eps-simulation relation from s1 to s2, if it relates every initial
 * state of s1 to an initial state of s2 */
std::optional<Relation> check_simulation(const FiniteSystem& s1, const FiniteSystem& s2,
                                         double eps);

/* maximal eps-bisimulation relation, if initial conditions hold both ways */
std::optional<Relation> check_bisimulation(const FiniteSystem& s1, const FiniteSystem& s2,
                                           double eps);

/* whether the given relation satisfies the output and transition conditions
 * of an eps-simulation from s1 to s2 (initial condition not checked) */
bool is_simulation_relation(const FiniteSystem& s1, const FiniteSystem& s2,
                            const Relation& rel, double eps);

/* at most one target per (state, input) */
bool is_deterministic(const FiniteSystem& s);

}  // namespace symctrl

#endif  // SYMCTRL_TSYS_HPP_
