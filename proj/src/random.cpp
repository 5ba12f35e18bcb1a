#include "decorate/random.hpp"

namespace decorate {

double keyed_uniform(std::uint64_t seed, std::uint64_t stream, std::string_view id) {
  std::uint64_t x = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
  x = splitmix64(x ^ stream);
  x = splitmix64(x ^ fnv1a64(id));
  return to_open_unit(x);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  // Rejection sampling removes modulo bias.
  // [threshold, 2^64) holds a whole multiple of bound values.
  const std::uint64_t threshold = (0 - bound) % bound;
  std::uint64_t x = next();
  while (x < threshold) x = next();
  return x % bound;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose, std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ fnv1a64(purpose)) + index);
}

}  // namespace decorate
