#pragma once

#include <cstdint>
#include <limits>

namespace isorank {

// Counter-based generator: the i-th output is a fixed function of (key, i),
// so any stream can be replayed or split without carrying hidden state.
// Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Independent child stream labelled by `tag`; does not advance this stream.
  Rng derive(std::uint64_t tag) const;
  Rng derive(std::uint64_t a, std::uint64_t b) const { return derive(a).derive(b); }

  double uniform();  // [0, 1)
  std::uint64_t below(std::uint64_t bound);  // uniform on [0, bound)

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace isorank
