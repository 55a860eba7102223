#pragma once

#include <cstdint>

namespace ramify {

// Counter-based generator: value(i) depends only on (seed, stream, i), so
// parallel consumers produce identical streams regardless of scheduling.
class CounterRng {
 public:
  explicit CounterRng(uint64_t seed, uint64_t stream = 0)
      : base_(mix(seed ^ 0x9e3779b97f4a7c15ull * (stream + 1), stream)), counter_(0) {}

  uint64_t next_u64() { return at(counter_++); }

  // Stateless access: the i-th value of this stream.
  uint64_t at(uint64_t i) const { return mix(base_, i); }

  double next_double() {  // uniform in [0,1)
    return double(next_u64() >> 11) * 0x1.0p-53;
  }

  double double_at(uint64_t i) const { return double(at(i) >> 11) * 0x1.0p-53; }

  uint64_t next_below(uint64_t n) { return next_u64() % n; }

  static uint64_t mix(uint64_t a, uint64_t b) {
    uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  uint64_t base_;
  uint64_t counter_;
};

}  // namespace ramify
