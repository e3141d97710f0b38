/* random instances and small fixtures shared by the unit and acceptance tests */
#ifndef SYMCTRL_TESTS_SUPPORT_HPP_
#define SYMCTRL_TESTS_SUPPORT_HPP_

#include <random>
#include <string>
#include <vector>

#include "symctrl/abstraction.hpp"
#include "symctrl/dynamics.hpp"
#include "symctrl/expr.hpp"
#include "symctrl/tsys.hpp"

namespace testing {

using namespace symctrl;

inline Box cube(int n, double lo, double hi) { return Box(static_cast<std::size_t>(n), Interval{lo, hi}); }

inline std::vector<Expr> fields(const std::vector<std::string>& text, int n, int m) {
  std::vector<Expr> out;
  for (const auto& t : text) out.push_back(parse_expression(t, n, m));
  return out;
}

/*
 * Random finite system with outputs on a coarse grid (so that distinct
 * systems share outputs often enough to make composition non-trivial).
 */
inline FiniteSystem random_system(std::mt19937_64& rng, int dim = 1, std::uint32_t max_states = 10,
                                  std::uint32_t max_inputs = 3, double density = 0.25) {
  std::uniform_int_distribution<std::uint32_t> ns(1, max_states), nu(1, max_inputs);
  std::uniform_int_distribution<int> grid(-2, 2);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const std::uint32_t n = ns(rng), m = nu(rng);
  Eigen::MatrixXd outs(n, dim);
  for (std::uint32_t i = 0; i < n; ++i)
    for (int c = 0; c < dim; ++c) outs(i, c) = 0.5 * grid(rng);
  std::vector<std::uint32_t> inits;
  for (std::uint32_t i = 0; i < n; ++i)
    if (coin(rng) < 0.4) inits.push_back(i);
  std::vector<Transition> trans;
  for (std::uint32_t s = 0; s < n; ++s)
    for (std::uint32_t u = 0; u < m; ++u)
      for (std::uint32_t t = 0; t < n; ++t)
        if (coin(rng) < density / n * 2) trans.push_back({s, u, t});
  return FiniteSystem(outs, inits, m, trans);
}

/* random 1-D or 2-D system whose field mixes linear terms and a bounded
 * nonlinearity, with small state and input boxes */
inline ControlSystem random_control_system(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 2);
  std::uniform_real_distribution<double> coef(-1.5, 1.5), pos(0.2, 1.5);
  const int n = dim(rng), m = 1;
  std::vector<std::string> f;
  for (int i = 1; i <= n; ++i) {
    std::string e = "-" + std::to_string(pos(rng)) + "*x" + std::to_string(i);
    int j = (i % n) + 1;
    e += " + " + std::to_string(coef(rng)) + "*sin(x" + std::to_string(j) + ")";
    e += " + " + std::to_string(coef(rng)) + "*u1";
    f.push_back(e);
  }
  return ControlSystem(cube(n, -1, 1), cube(n, -0.5, 0.5), cube(m, -1, 1), fields(f, n, m));
}

}  // namespace testing

#endif  // SYMCTRL_TESTS_SUPPORT_HPP_
