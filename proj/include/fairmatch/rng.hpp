#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fairmatch {

/// Independent random streams are keyed by (root seed, kind, index):
///
///   seed = mix(mix(root) ^ mix(kind << 32 ^ index))
///
/// with mix = SplitMix64 finalizer. Each stream drives its own mt19937_64,
/// so consuming draws in one stream never shifts another.
enum class StreamKind : std::uint64_t {
  arrival = 1,      // index = task type
  merged_arrival = 2,
  service = 3,
  policy = 4,
  solver_start = 5,  // index = multistart start number
  generator = 6,
  replication = 7,
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t root, StreamKind kind, std::uint64_t index = 0);
std::uint64_t hash_seeds(std::initializer_list<std::uint64_t> parts);

/// Thin wrapper over mt19937_64 with distribution code written out so draws
/// are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
};

}  // namespace fairmatch
