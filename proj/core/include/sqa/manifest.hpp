#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace sqa {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a64_step(std::uint64_t h, unsigned char byte) {
    return (h ^ byte) * kFnvPrime;
}

std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);
std::uint64_t hash_file(const std::string& path);

// Writes <dir>/manifest.txt listing every regular file under dir (the
// manifest itself excluded) as "<fnv1a64 hex>  <relative path>", sorted by
// path. Returns the listed paths.
std::vector<std::string> write_manifest(const std::string& dir);

// Hex digest helper (16 lowercase chars).
std::string to_hex64(std::uint64_t h);

}  // namespace sqa
