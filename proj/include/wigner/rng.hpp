#pragma once

#include <cstdint>
#include <random>

namespace wigner {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of stream `index` derived from `master`. Streams never depend on the
/// order in which they are consumed.
constexpr std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Named sub-streams so per-trial, basis and reference draws never collide.
enum class Stream : std::uint64_t {
    trial = 0,
    basis = 1,
    reference = 2,
    vectors = 3,
};

constexpr std::uint64_t stream_seed(std::uint64_t master, Stream stream, std::uint64_t index) {
    return mix_seed(mix_seed(master, static_cast<std::uint64_t>(stream)), index);
}

}  // namespace wigner
