#include "ezfsched/schedule.hpp"

#include <cassert>

namespace ezfsched {

void Schedule::set(const Association& assoc, int k, int s, bool value) {
  auto& cell = b[static_cast<std::size_t>(k) * S + s];
  if ((cell != 0) == value) return;
  cell = value ? 1 : 0;
  const int delta = value ? 1 : -1;
  for (int m : assoc.serving[k]) a[static_cast<std::size_t>(m) * S + s] += delta;
}

Schedule make_empty_schedule(const Association& assoc, int K, int S) {
  Schedule sched;
  sched.K = K;
  sched.S = S;
  sched.M = assoc.bs_count();
  sched.b.assign(static_cast<std::size_t>(K) * S, 0);
  sched.a.assign(static_cast<std::size_t>(sched.M) * S, 0);
  return sched;
}

int derived_layers(const Schedule& schedule, const Association& assoc, int m, int s) {
  int n = 0;
  for (int z : assoc.attached[m]) n += schedule.get(z, s) ? 1 : 0;
  return n;
}

}  // namespace ezfsched
