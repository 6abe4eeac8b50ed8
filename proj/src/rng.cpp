#include "fairmatch/rng.hpp"

#include <cmath>

namespace fairmatch {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, StreamKind kind, std::uint64_t index) {
  const auto key = (static_cast<std::uint64_t>(kind) << 32) ^ index;
  return splitmix64(splitmix64(root) ^ splitmix64(key));
}

std::uint64_t hash_seeds(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

double Rng::exponential(double rate) { return -std::log1p(-uniform()) / rate; }

}  // namespace fairmatch
