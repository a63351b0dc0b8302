#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "rkpair/trees.hpp"

namespace rkpair::oracle {

// Rooted unlabeled trees: a(n+1) = (1/n) sum_{k=1..n} (sum_{d|k} d a(d)) a(n-k+1).
inline std::vector<long> tree_counts(int n_max) {
  std::vector<long> a(n_max + 1, 0);
  a[1] = 1;
  for (int n = 1; n < n_max; ++n) {
    long sum = 0;
    for (int k = 1; k <= n; ++k) {
      long s = 0;
      for (int d = 1; d <= k; ++d) {
        if (k % d == 0) s += d * a[d];
      }
      sum += s * a[n - k + 1];
    }
    a[n + 1] = sum / n;
  }
  return a;
}

inline void parent_array(const RootedTree& t, int parent, std::vector<int>& parents) {
  const int self = static_cast<int>(parents.size());
  parents.push_back(parent);
  for (const auto& c : t.children()) parent_array(c, self, parents);
}

// Vertex permutations fixing the root and preserving the parent map.
inline long automorphisms(const RootedTree& t) {
  std::vector<int> parents;
  parent_array(t, -1, parents);
  std::vector<int> perm(parents.size());
  std::iota(perm.begin(), perm.end(), 0);
  long count = 0;
  do {
    bool ok = perm[0] == 0;
    for (std::size_t v = 1; ok && v < parents.size(); ++v) {
      ok = perm[parents[v]] == parents[perm[v]];
    }
    count += ok;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

// Product over vertices of the subtree sizes.
inline long tree_factorial(const RootedTree& t) {
  std::vector<int> parents;
  parent_array(t, -1, parents);
  std::vector<long> size(parents.size(), 1);
  for (std::size_t v = parents.size(); v-- > 1;) size[parents[v]] += size[v];
  long prod = 1;
  for (long s : size) prod *= s;
  return prod;
}

}  // namespace rkpair::oracle
