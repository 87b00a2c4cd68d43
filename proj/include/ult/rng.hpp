#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace ult {

using rng_t = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Counter-style seed derivation: the same (root, tags) always gives the same
// substream, independent of the order in which substreams are created.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags);

rng_t make_stream(std::uint64_t root, std::initializer_list<std::uint64_t> tags);

// Stable 64-bit string hash (FNV-1a), used for stream tags and file hashes.
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(std::string_view s);

} // namespace ult
