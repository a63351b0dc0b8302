#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rkpair/scalar.hpp"

namespace rkpair {

// Rooted tree in canonical form: children kept sorted ascending under the
// total order (order first, then lexicographic on child lists).
class RootedTree {
 public:
  RootedTree();  // single vertex
  explicit RootedTree(std::vector<RootedTree> children);

  static RootedTree leaf() { return RootedTree(); }
  static RootedTree chain(int vertices);
  static RootedTree bushy(int vertices);

  int order() const { return order_; }
  const std::vector<RootedTree>& children() const { return *children_; }

  // Bracket notation: leaf "o", otherwise "[child child ...]".
  std::string to_string() const;

  friend std::strong_ordering operator<=>(const RootedTree& a, const RootedTree& b);
  friend bool operator==(const RootedTree& a, const RootedTree& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

 private:
  std::shared_ptr<const std::vector<RootedTree>> children_;
  int order_;
};

std::int64_t density(const RootedTree& t);
std::int64_t symmetry(const RootedTree& t);

struct TreeEntry {
  RootedTree tree;
  std::int64_t density;
  std::int64_t symmetry;
};
using TreeTable = std::vector<TreeEntry>;

constexpr int kMaxTreeOrder = 8;

// All trees of order <= max_order, sorted by order then canonical order.
TreeTable enumerate_trees(int max_order);
// Trees of exactly the given order (cached).
const std::vector<RootedTree>& trees_of_order(int order);

// Stage vector Phi(t); a is the full s x s coefficient matrix.
template <class T>
Vector<T> elementary_weight(const RootedTree& t, const Matrix<T>& a) {
  const std::size_t s = a.size();
  Vector<T> phi(s, T(1));
  for (const auto& child : t.children()) {
    const Vector<T> inner = elementary_weight(child, a);
    for (std::size_t i = 0; i < s; ++i) {
      T acc = 0;
      for (std::size_t j = 0; j < i && j < a[i].size(); ++j) acc += a[i][j] * inner[j];
      phi[i] *= acc;
    }
  }
  return phi;
}

template <class T>
T dot(const Vector<T>& x, const Vector<T>& y) {
  T acc = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) acc += x[i] * y[i];
  return acc;
}

}  // namespace rkpair
