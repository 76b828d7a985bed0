#include "switchgrid/util/hash.hpp"

#include <cstdlib>
#include <string>

#include <fmt/format.h>

#include "switchgrid/util/parallel.hpp"

namespace switchgrid {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t child_seed(std::uint64_t master, std::string_view name) {
  return mix_seed(master, fnv1a(name));
}

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

int threads_from_env(int fallback) {
  const char* raw = std::getenv("SWITCHGRID_THREADS");
  if (raw == nullptr || *raw == '\0') return fallback;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 1 || v > 1024) return fallback;
  return static_cast<int>(v);
}

}  // namespace switchgrid
