#ifndef LUSIM_RNG_HPP
#define LUSIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace lusim {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t x) { return splitmix64(x); }

inline std::uint64_t rotl64(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

/// Counter-free xoshiro256++ stream keyed by (seed, stream id). The same key
/// always reproduces the same sample sequence, on every platform; one stream
/// per event-kind generator keeps arrival processes independent of each other
/// and of policy, enabling common-random-number comparisons.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
    std::uint64_t sm = seed ^ (0x9E3779B97F4A7C15ull * (stream_id + 0x632BE59BD9B4E019ull));
    for (auto& word : state_) word = detail::splitmix64(sm);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  /// Uniform double strictly inside (0, 1).
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_[4];
};

/// Exponential variate with mean 1/rate via inverse CDF. Always strictly
/// positive and finite.
inline double sample_exponential(RngStream& stream, double rate) {
  if (!(std::isfinite(rate) && rate > 0))
    throw std::invalid_argument("sample_exponential: rate must be finite and > 0");
  return -std::log(stream.next_unit()) / rate;
}

/// Deterministic replication seed derived from a base seed and an index.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return detail::mix64(base ^ (0xD1B54A32D192ED03ull * (index + 1)));
}

}  // namespace lusim

#endif  // LUSIM_RNG_HPP
