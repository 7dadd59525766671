#pragma once

#include <cstdint>
#include <vector>

#include "ezfsched/scenario.hpp"

namespace ezfsched {

// Binary RBG assignment b[k,s] with the derived per-BS layer counts
// A[m,s] = sum over z attached to m of b[z,s]. A JT UE counts once at each
// of its serving BSs.
struct Schedule {
  int K = 0, S = 0, M = 0;
  std::vector<std::uint8_t> b;  // [k*S + s]
  std::vector<int> a;           // [m*S + s]

  bool get(int k, int s) const { return b[static_cast<std::size_t>(k) * S + s] != 0; }
  int layers(int m, int s) const { return a[static_cast<std::size_t>(m) * S + s]; }

  void set(const Association& assoc, int k, int s, bool value);

  bool operator==(const Schedule& other) const = default;
};

Schedule make_empty_schedule(const Association& assoc, int K, int S);

// Recomputes A[m,s] from b; used by consistency checks.
int derived_layers(const Schedule& schedule, const Association& assoc, int m, int s);

}  // namespace ezfsched
