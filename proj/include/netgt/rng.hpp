#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace netgt {

// Counter-based randomness built on the SplitMix64 output function: the i-th
// draw of a stream is mix64(key + (i + 1) * gamma), so any draw can be
// computed without touching the others. Streams are addressed by keys derived
// from (seed, cell, replication, purpose); parallel schedules therefore never
// change a sample.

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct StreamKey {
  std::uint64_t value = 0;

  constexpr StreamKey derive(std::uint64_t tag) const noexcept {
    return StreamKey{mix64(value ^ mix64(tag + kGolden))};
  }

  constexpr StreamKey derive(std::initializer_list<std::uint64_t> tags) const noexcept {
    StreamKey k = *this;
    for (auto t : tags) k = k.derive(t);
    return k;
  }

  friend constexpr bool operator==(StreamKey, StreamKey) = default;
};

// Purposes, so that edge and membership streams never collide.
enum class StreamPurpose : std::uint64_t {
  edges = 0x65646765,
  memberships = 0x6d656d62,
  parameters = 0x70617261,
};

constexpr StreamKey purpose_key(StreamKey key, StreamPurpose p) noexcept {
  return key.derive(static_cast<std::uint64_t>(p));
}

constexpr std::uint64_t bits_at(StreamKey key, std::uint64_t counter) noexcept {
  return mix64(key.value + (counter + 1) * kGolden);
}

// Uniform in [0, 1) with 53 random bits.
constexpr double uniform_at(StreamKey key, std::uint64_t counter) noexcept {
  return static_cast<double>(bits_at(key, counter) >> 11) * 0x1.0p-53;
}

// UniformRandomBitGenerator over one stream, for std distributions.
class CounterEngine {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterEngine(StreamKey key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return bits_at(key_, counter_++); }

  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  StreamKey key_;
  std::uint64_t counter_ = 0;
};

}  // namespace netgt
