#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "catmouse/chain.hpp"

namespace catmouse {

template <class S>
struct CatMouseState {
  S cat{};
  S mouse{};
  double clock = 0.0;
  bool together() const { return cat == mouse; }
  friend bool operator==(const CatMouseState&, const CatMouseState&) = default;
};

// One step of the pair chain. When together, the cat draws first, then the mouse.
template <DiscreteKernel K>
CatMouseState<typename K::state_type> cm_step(const CatMouseState<typename K::state_type>& s,
                                              const K& base, Stream& rng) {
  if (!(s.cat == s.mouse)) return {base.step(s.cat, rng), s.mouse, s.clock};
  auto cat = base.step(s.cat, rng);
  auto mouse = base.step(s.mouse, rng);
  return {cat, mouse, s.clock};
}

inline constexpr std::size_t kDefaultProductCap = 64;

inline std::size_t pair_index(std::size_t cat, std::size_t mouse, std::size_t n) { return cat * n + mouse; }

// Explicit kernel on S x S, state (x, y) stored at x * n + y.
FiniteChain cm_kernel(const FiniteChain& base, std::size_t cap = kDefaultProductCap);

template <class S>
struct CycleRecord {
  std::uint64_t together_duration = 0;
  std::uint64_t apart_duration = 0;
  S mouse_from{};
  S mouse_to{};
};

inline std::int64_t displacement(const CycleRecord<std::int64_t>& c) { return c.mouse_to - c.mouse_from; }
inline Point2 displacement(const CycleRecord<Point2>& c) { return c.mouse_to - c.mouse_from; }

template <class S>
struct CycleRun {
  std::vector<CycleRecord<S>> cycles;
  std::uint64_t steps = 0;
  bool partial = false;
};

// Cycles start at a meeting instant and end at the next meeting after a
// separation. If `start` is not a meeting state the pair is first run to one.
template <DiscreteKernel K>
CycleRun<typename K::state_type> simulate_cycles(
    const K& base, CatMouseState<typename K::state_type> start, std::size_t n_cycles, Stream& rng,
    std::uint64_t step_budget = std::numeric_limits<std::uint64_t>::max()) {
  CycleRun<typename K::state_type> run;
  auto s = start;
  auto advance = [&] {
    if (run.steps >= step_budget) return false;
    s = cm_step(s, base, rng);
    ++run.steps;
    return true;
  };
  while (!s.together())
    if (!advance()) return run.partial = true, run;
  run.cycles.reserve(n_cycles);
  for (std::size_t c = 0; c < n_cycles; ++c) {
    CycleRecord<typename K::state_type> rec;
    rec.mouse_from = s.mouse;
    while (s.together()) {
      if (!advance()) return run.partial = true, run;
      ++rec.together_duration;
    }
    while (!s.together()) {
      if (!advance()) return run.partial = true, run;
      ++rec.apart_duration;
    }
    rec.mouse_to = s.mouse;
    run.cycles.push_back(rec);
  }
  return run;
}

}  // namespace catmouse
