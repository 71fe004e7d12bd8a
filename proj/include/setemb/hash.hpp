#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace setemb {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;

/// 64-bit FNV-1a; chain calls by passing the previous result as `seed`.
constexpr std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value);

/// FNV-1a of a file's bytes. Throws DataError if unreadable.
std::uint64_t hash_file(const std::filesystem::path& path);

}  // namespace setemb
