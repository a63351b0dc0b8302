#include "rkpair/trees.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include "rkpair/errors.hpp"

namespace rkpair {

RootedTree::RootedTree()
    : children_(std::make_shared<const std::vector<RootedTree>>()), order_(1) {}

RootedTree::RootedTree(std::vector<RootedTree> children) : order_(1) {
  std::sort(children.begin(), children.end());
  for (const auto& c : children) order_ += c.order();
  children_ = std::make_shared<const std::vector<RootedTree>>(std::move(children));
}

RootedTree RootedTree::chain(int vertices) {
  RootedTree t;
  for (int i = 1; i < vertices; ++i) t = RootedTree(std::vector<RootedTree>{t});
  return t;
}

RootedTree RootedTree::bushy(int vertices) {
  return RootedTree(std::vector<RootedTree>(static_cast<std::size_t>(vertices - 1)));
}

std::strong_ordering operator<=>(const RootedTree& a, const RootedTree& b) {
  if (a.order_ != b.order_) return a.order_ <=> b.order_;
  if (a.children_ == b.children_) return std::strong_ordering::equal;
  const auto& x = *a.children_;
  const auto& y = *b.children_;
  return std::lexicographical_compare_three_way(x.begin(), x.end(), y.begin(), y.end());
}

std::string RootedTree::to_string() const {
  if (children_->empty()) return "o";
  std::string out = "[";
  for (std::size_t i = 0; i < children_->size(); ++i) {
    if (i) out += ' ';
    out += (*children_)[i].to_string();
  }
  return out + "]";
}

std::int64_t density(const RootedTree& t) {
  std::int64_t d = t.order();
  for (const auto& c : t.children()) d *= density(c);
  return d;
}

std::int64_t symmetry(const RootedTree& t) {
  std::int64_t s = 1;
  const auto& ch = t.children();
  std::size_t i = 0;
  while (i < ch.size()) {
    std::size_t j = i;
    while (j < ch.size() && ch[j] == ch[i]) ++j;
    const std::int64_t sub = symmetry(ch[i]);
    for (std::size_t k = 1; k <= j - i; ++k) s *= sub * static_cast<std::int64_t>(k);
    i = j;
  }
  return s;
}

namespace {

// Non-decreasing selections from `pool` (index >= start) with orders summing to `rest`.
void extend(const std::vector<RootedTree>& pool, std::size_t start, int rest,
            std::vector<RootedTree>& current, std::vector<RootedTree>& out) {
  if (rest == 0) {
    out.emplace_back(current);
    return;
  }
  for (std::size_t k = start; k < pool.size(); ++k) {
    if (pool[k].order() > rest) continue;
    current.push_back(pool[k]);
    extend(pool, k, rest - pool[k].order(), current, out);
    current.pop_back();
  }
}

}  // namespace

const std::vector<RootedTree>& trees_of_order(int order) {
  if (order < 1 || order > kMaxTreeOrder) {
    throw RangeError("tree order must lie in [1, " + std::to_string(kMaxTreeOrder) + "]");
  }
  static std::mutex mutex;
  static std::map<int, std::vector<RootedTree>> cache;
  std::lock_guard lock(mutex);
  if (cache.empty()) {
    cache[1] = {RootedTree()};
    std::vector<RootedTree> pool = cache[1];
    for (int n = 2; n <= kMaxTreeOrder; ++n) {
      std::vector<RootedTree> current, out;
      extend(pool, 0, n - 1, current, out);
      std::sort(out.begin(), out.end());
      pool.insert(pool.end(), out.begin(), out.end());
      cache[n] = std::move(out);
    }
  }
  return cache.at(order);
}

TreeTable enumerate_trees(int max_order) {
  if (max_order < 1 || max_order > kMaxTreeOrder) {
    throw RangeError("tree order must lie in [1, " + std::to_string(kMaxTreeOrder) + "]");
  }
  TreeTable table;
  for (int n = 1; n <= max_order; ++n) {
    for (const auto& t : trees_of_order(n)) table.push_back({t, density(t), symmetry(t)});
  }
  return table;
}

}  // namespace rkpair
