#include "symctrl/tsys.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace symctrl {

namespace {

std::uint64_t pack(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

/* byte key of an output row; -0.0 and 0.0 map to the same key */
std::string row_key(const Eigen::MatrixXd& m, Eigen::Index r) {
  std::string key(static_cast<std::size_t>(m.cols()) * sizeof(double), '\0');
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    double v = m(r, c) + 0.0;
    std::memcpy(key.data() + c * sizeof(double), &v, sizeof(double));
  }
  return key;
}

std::string cell_key(const std::vector<std::int64_t>& cell) {
  return std::string(reinterpret_cast<const char*>(cell.data()),
                     cell.size() * sizeof(std::int64_t));
}

using PairSet = std::unordered_set<std::uint64_t>;

PairSet to_set(const Relation& r) {
  PairSet s;
  s.reserve(r.size() * 2);
  for (auto [a, b] : r) s.insert(pack(a, b));
  return s;
}

Relation to_relation(const PairSet& s) {
  Relation r;
  r.reserve(s.size());
  for (auto p : s) r.emplace_back(static_cast<std::uint32_t>(p >> 32), static_cast<std::uint32_t>(p));
  std::sort(r.begin(), r.end());
  return r;
}

/* every move of a in s1 is matched by a move of b in s2 landing in rel */
bool forward_ok(const FiniteSystem& s1, const FiniteSystem& s2, std::uint32_t a,
                std::uint32_t b, const PairSet& rel, bool swapped) {
  for (const auto& t1 : s1.out(a)) {
    bool matched = false;
    for (const auto& t2 : s2.out(b)) {
      auto key = swapped ? pack(t2.target, t1.target) : pack(t1.target, t2.target);
      if (rel.count(key)) {
        matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return true;
}

/* greatest fixpoint from the output-compatible pairs */
PairSet refine(const FiniteSystem& s1, const FiniteSystem& s2, double eps, bool both_ways) {
  PairSet rel = to_set(compatible_pairs(s1.outputs(), s2.outputs(), eps));
  for (bool changed = true; changed;) {
    changed = false;
    for (auto it = rel.begin(); it != rel.end();) {
      auto a = static_cast<std::uint32_t>(*it >> 32);
      auto b = static_cast<std::uint32_t>(*it);
      bool ok = forward_ok(s1, s2, a, b, rel, false) &&
                (!both_ways || forward_ok(s2, s1, b, a, rel, true));
      if (ok) {
        ++it;
      } else {
        it = rel.erase(it);
        changed = true;
      }
    }
  }
  return rel;
}

bool initials_covered(const FiniteSystem& s1, const FiniteSystem& s2, const PairSet& rel) {
  for (auto a : s1.initials()) {
    bool found = false;
    for (auto b : s2.initials())
      if (rel.count(pack(a, b))) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

}  // namespace

FiniteSystem::FiniteSystem(Eigen::MatrixXd outputs, std::vector<std::uint32_t> initials,
                           std::uint32_t num_inputs, std::vector<Transition> transitions,
                           std::vector<std::uint64_t> labels)
    : outputs_(std::move(outputs)),
      initials_(std::move(initials)),
      num_inputs_(num_inputs),
      transitions_(std::move(transitions)),
      labels_(std::move(labels)) {
  const std::size_t n = num_states();
  std::sort(initials_.begin(), initials_.end());
  initials_.erase(std::unique(initials_.begin(), initials_.end()), initials_.end());
  if (!initials_.empty() && initials_.back() >= n)
    throw std::invalid_argument("initial state out of range");
  if (!std::is_sorted(transitions_.begin(), transitions_.end()))
    std::sort(transitions_.begin(), transitions_.end());
  transitions_.erase(std::unique(transitions_.begin(), transitions_.end()), transitions_.end());
  for (const auto& t : transitions_)
    if (t.source >= n || t.target >= n || t.input >= num_inputs_)
      throw std::invalid_argument("transition out of range");
  if (labels_.empty()) {
    labels_.resize(n);
    for (std::size_t i = 0; i < n; ++i) labels_[i] = i;
  } else if (labels_.size() != n) {
    throw std::invalid_argument("one label per state required");
  }
  offsets_.assign(n + 1, 0);
  for (const auto& t : transitions_) ++offsets_[t.source + 1];
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
}

std::size_t FiniteSystem::num_active_states() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < num_states(); ++i)
    if (offsets_[i + 1] > offsets_[i]) ++count;
  return count;
}

bool FiniteSystem::is_initial(std::uint32_t s) const {
  return std::binary_search(initials_.begin(), initials_.end(), s);
}

FiniteSystem FiniteSystem::restrict_to(const std::vector<char>& keep) const {
  const std::uint32_t none = UINT32_MAX;
  std::vector<std::uint32_t> remap(num_states(), none);
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < num_states(); ++i)
    if (keep[i]) remap[i] = next++;

  Eigen::MatrixXd outs(next, outputs_.cols());
  std::vector<std::uint64_t> labels(next);
  for (std::size_t i = 0; i < num_states(); ++i)
    if (remap[i] != none) {
      outs.row(remap[i]) = outputs_.row(static_cast<Eigen::Index>(i));
      labels[remap[i]] = labels_[i];
    }
  std::vector<std::uint32_t> inits;
  for (auto s : initials_)
    if (remap[s] != none) inits.push_back(remap[s]);
  std::vector<Transition> trans;
  for (const auto& t : transitions_)
    if (remap[t.source] != none && remap[t.target] != none)
      trans.push_back({remap[t.source], t.input, remap[t.target]});
  return FiniteSystem(std::move(outs), std::move(inits), num_inputs_, std::move(trans),
                      std::move(labels));
}

Relation compatible_pairs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double eps) {
  if (a.cols() != b.cols()) throw std::invalid_argument("output dimensions differ");
  if (!(eps >= 0)) throw std::invalid_argument("eps must be nonnegative");
  Relation out;
  if (a.rows() == 0 || b.rows() == 0) return out;

  if (eps == 0) {
    std::unordered_map<std::string, std::vector<std::uint32_t>> buckets;
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      buckets[row_key(b, j)].push_back(static_cast<std::uint32_t>(j));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      auto it = buckets.find(row_key(a, i));
      if (it == buckets.end()) continue;
      for (auto j : it->second) out.emplace_back(static_cast<std::uint32_t>(i), j);
    }
    return out;
  }

  const auto dim = static_cast<std::size_t>(a.cols());
  std::unordered_map<std::string, std::vector<std::uint32_t>> grid;
  std::vector<std::int64_t> cell(dim);
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (std::size_t c = 0; c < dim; ++c)
      cell[c] = static_cast<std::int64_t>(std::floor(b(j, static_cast<Eigen::Index>(c)) / eps));
    grid[cell_key(cell)].push_back(static_cast<std::uint32_t>(j));
  }
  std::size_t neighbours = 1;
  for (std::size_t c = 0; c < dim; ++c) neighbours *= 3;
  std::vector<std::int64_t> base(dim);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (std::size_t c = 0; c < dim; ++c)
      base[c] = static_cast<std::int64_t>(std::floor(a(i, static_cast<Eigen::Index>(c)) / eps));
    for (std::size_t nb = 0; nb < neighbours; ++nb) {
      std::size_t code = nb;
      for (std::size_t c = 0; c < dim; ++c) {
        cell[c] = base[c] + static_cast<std::int64_t>(code % 3) - 1;
        code /= 3;
      }
      auto it = grid.find(cell_key(cell));
      if (it == grid.end()) continue;
      for (auto j : it->second)
        if ((a.row(i) - b.row(j)).cwiseAbs().maxCoeff() <= eps)
          out.emplace_back(static_cast<std::uint32_t>(i), j);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

FiniteSystem compose(const FiniteSystem& s1, const FiniteSystem& s2, double eps,
                     ComposeStats* stats) {
  if (s1.output_dim() != s2.output_dim())
    throw std::invalid_argument("compose: output spaces differ");
  Relation pairs = compatible_pairs(s1.outputs(), s2.outputs(), eps);
  if (pairs.size() > UINT32_MAX) throw std::length_error("compose: too many states");
  const std::uint64_t inputs =
      static_cast<std::uint64_t>(s1.num_inputs()) * s2.num_inputs();
  if (inputs > UINT32_MAX) throw std::length_error("compose: too many inputs");

  std::unordered_map<std::uint64_t, std::uint32_t> index;
  index.reserve(pairs.size() * 2);
  Eigen::MatrixXd outs(static_cast<Eigen::Index>(pairs.size()), s1.output_dim());
  std::vector<std::uint64_t> labels(pairs.size());
  std::vector<std::uint32_t> inits;
  for (std::uint32_t i = 0; i < pairs.size(); ++i) {
    auto [a, b] = pairs[i];
    index.emplace(pack(a, b), i);
    outs.row(i) = s1.output(a);
    labels[i] = pack(a, b);
    if (s1.is_initial(a) && s2.is_initial(b)) inits.push_back(i);
  }

  std::uint64_t checks = 0;
  std::vector<Transition> trans;
  for (std::uint32_t i = 0; i < pairs.size(); ++i) {
    auto [a, b] = pairs[i];
    for (const auto& t1 : s1.out(a))
      for (const auto& t2 : s2.out(b)) {
        ++checks;
        auto it = index.find(pack(t1.target, t2.target));
        if (it != index.end())
          trans.push_back({i, t1.input * s2.num_inputs() + t2.input, it->second});
      }
  }
  if (stats) stats->pair_checks = checks;
  return FiniteSystem(std::move(outs), std::move(inits), static_cast<std::uint32_t>(inputs),
                      std::move(trans), std::move(labels));
}

FiniteSystem nonblocking_part(const FiniteSystem& s) {
  const std::size_t n = s.num_states();
  std::vector<std::size_t> outdeg(n), pred_off(n + 1, 0);
  for (const auto& t : s.transitions()) {
    ++outdeg[t.source];
    ++pred_off[t.target + 1];
  }
  for (std::size_t i = 0; i < n; ++i) pred_off[i + 1] += pred_off[i];
  std::vector<std::uint32_t> preds(s.num_transitions());
  {
    auto fill = pred_off;
    for (const auto& t : s.transitions()) preds[fill[t.target]++] = t.source;
  }

  std::vector<char> keep(n, 1);
  std::deque<std::uint32_t> dead;
  for (std::uint32_t i = 0; i < n; ++i)
    if (outdeg[i] == 0) {
      keep[i] = 0;
      dead.push_back(i);
    }
  while (!dead.empty()) {
    auto y = dead.front();
    dead.pop_front();
    for (auto k = pred_off[y]; k < pred_off[y + 1]; ++k) {
      auto z = preds[k];
      if (keep[z] && --outdeg[z] == 0) {
        keep[z] = 0;
        dead.push_back(z);
      }
    }
  }
  return s.restrict_to(keep);
}

FiniteSystem accessible_part(const FiniteSystem& s) {
  std::vector<char> seen(s.num_states(), 0);
  std::deque<std::uint32_t> queue;
  for (auto i : s.initials())
    if (!seen[i]) {
      seen[i] = 1;
      queue.push_back(i);
    }
  while (!queue.empty()) {
    auto x = queue.front();
    queue.pop_front();
    for (const auto& t : s.out(x))
      if (!seen[t.target]) {
        seen[t.target] = 1;
        queue.push_back(t.target);
      }
  }
  return s.restrict_to(seen);
}

std::optional<Relation> check_simulation(const FiniteSystem& s1, const FiniteSystem& s2,
                                         double eps) {
  PairSet rel = refine(s1, s2, eps, false);
  if (!initials_covered(s1, s2, rel)) return std::nullopt;
  return to_relation(rel);
}

std::optional<Relation> check_bisimulation(const FiniteSystem& s1, const FiniteSystem& s2,
                                           double eps) {
  PairSet rel = refine(s1, s2, eps, true);
  if (!initials_covered(s1, s2, rel)) return std::nullopt;
  PairSet inverse;
  for (auto p : rel) inverse.insert(pack(static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32)));
  if (!initials_covered(s2, s1, inverse)) return std::nullopt;
  return to_relation(rel);
}

bool is_simulation_relation(const FiniteSystem& s1, const FiniteSystem& s2,
                            const Relation& rel, double eps) {
  PairSet set = to_set(rel);
  for (auto [a, b] : rel) {
    if (a >= s1.num_states() || b >= s2.num_states()) return false;
    if ((s1.output(a) - s2.output(b)).cwiseAbs().maxCoeff() > eps) return false;
    if (!forward_ok(s1, s2, a, b, set, false)) return false;
  }
  return true;
}

bool is_deterministic(const FiniteSystem& s) {
  const auto& t = s.transitions();
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i].source == t[i - 1].source && t[i].input == t[i - 1].input) return false;
  return true;
}

}  // namespace symctrl
