#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace postfeas {

/// Seeded 64-bit stream. (seed, stream_id) fully determines the sequence;
/// std::seed_seq and std::mt19937_64 are specified bit-for-bit by the standard,
/// so sequences are portable across platforms and compilers.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// stream_id = hash(seed, index, purpose). Distinct purposes ("scenario",
/// "certify", ...) give unrelated streams for the same trial index.
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index, std::string_view purpose);

/// Convenience: Rng(seed, derive_stream(seed, index, purpose)).
Rng make_stream(std::uint64_t seed, std::uint64_t index, std::string_view purpose);

}  // namespace postfeas
