#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace switchgrid {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Mixes two words into one with the splitmix64 finalizer.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Child seed derived from a master seed and a stable name.
std::uint64_t child_seed(std::uint64_t master, std::string_view name);

/// Zero-padded lowercase hexadecimal.
std::string hex64(std::uint64_t value);

}  // namespace switchgrid
