#include "symctrl/abstraction.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace symctrl {

namespace {

constexpr std::size_t kBlockRows = 4096;
constexpr std::uint32_t kNoTarget = UINT32_MAX;

Eigen::ArrayXXd lattice_matrix(const Lattice& lat) {
  Eigen::ArrayXXd pts(static_cast<Eigen::Index>(lat.size()), static_cast<Eigen::Index>(lat.dim()));
  for (std::size_t i = 0; i < lat.size(); ++i)
    pts.row(static_cast<Eigen::Index>(i)) = lat.point(i).transpose().array();
  return pts;
}

}  // namespace

unsigned worker_threads() {
  if (const char* env = std::getenv("SYMCTRL_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Lattice input_lattice(const ControlSystem& sys, const AbstractionSpec& spec) {
  if (!spec.mu) return Lattice(Box(static_cast<std::size_t>(sys.m()), Interval{0.0, 0.0}), 1.0);
  return Lattice(sys.input_box(), 2 * *spec.mu);
}

Abstraction build_abstraction(const ControlSystem& sys, const AbstractionSpec& spec,
                              std::uint64_t transition_cap) {
  if (!(spec.tau > 0) || !(spec.eta > 0) || (spec.mu && !(*spec.mu > 0)))
    throw std::invalid_argument("abstraction parameters must be positive");
  Lattice states(sys.state_box(), 2 * spec.eta);
  Lattice inputs = input_lattice(sys, spec);

  const std::size_t ns = states.size();
  const std::size_t nu = inputs.size();
  if (ns >= kNoTarget || nu >= kNoTarget)
    throw ResourceLimitError("lattice too large to index");
  const std::size_t total = ns * nu;
  if (total / nu != ns) throw ResourceLimitError("state-input product overflows");

  const Eigen::ArrayXXd xs = lattice_matrix(states);
  const Eigen::ArrayXXd us = lattice_matrix(inputs);
  std::vector<std::uint32_t> successor(total, kNoTarget);

  const std::size_t blocks = (total + kBlockRows - 1) / kBlockRows;
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::size_t err_block = SIZE_MAX;
  std::exception_ptr err;

  auto worker = [&] {
    Eigen::ArrayXXd x, u, z;
    Eigen::VectorXd zi(sys.n());
    for (;;) {
      std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      std::size_t begin = b * kBlockRows;
      std::size_t end = std::min(total, begin + kBlockRows);
      auto rows = static_cast<Eigen::Index>(end - begin);
      x.resize(rows, sys.n());
      u.resize(rows, us.cols());
      for (std::size_t r = begin; r < end; ++r) {
        auto row = static_cast<Eigen::Index>(r - begin);
        x.row(row) = xs.row(static_cast<Eigen::Index>(r / nu));
        u.row(row) = us.row(static_cast<Eigen::Index>(r % nu));
      }
      try {
        z = flow_batch(sys, x, u, spec.tau, spec.substeps);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (b < err_block) {
          err_block = b;
          err = std::current_exception();
        }
        continue;
      }
      for (Eigen::Index row = 0; row < rows; ++row) {
        zi = z.row(row).transpose().matrix();
        if (auto idx = states.quantize(zi))
          successor[begin + static_cast<std::size_t>(row)] = static_cast<std::uint32_t>(*idx);
      }
    }
  };

  unsigned threads = std::min<std::size_t>(worker_threads(), std::max<std::size_t>(blocks, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);

  std::size_t count = static_cast<std::size_t>(
      std::count_if(successor.begin(), successor.end(), [](auto s) { return s != kNoTarget; }));
  if (count > transition_cap)
    throw ResourceLimitError("abstraction needs " + std::to_string(count) +
                             " transitions, above the cap of " + std::to_string(transition_cap));

  std::vector<Transition> trans;
  trans.reserve(count);
  for (std::size_t r = 0; r < total; ++r)
    if (successor[r] != kNoTarget)
      trans.push_back({static_cast<std::uint32_t>(r / nu), static_cast<std::uint32_t>(r % nu),
                       successor[r]});
  std::vector<std::uint32_t>().swap(successor);

  std::vector<std::uint32_t> inits;
  for (auto i : initial_indices(states, sys.init_box())) inits.push_back(static_cast<std::uint32_t>(i));

  Eigen::MatrixXd outs = xs.matrix();
  FiniteSystem system(std::move(outs), std::move(inits), static_cast<std::uint32_t>(nu),
                      std::move(trans));
  return Abstraction{std::move(states), std::move(inputs), std::move(system)};
}

}  // namespace symctrl
