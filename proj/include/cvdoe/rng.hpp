#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace cvdoe {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a over bytes. Stable across platforms, unlike std::hash.
constexpr std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Counter-based stream derivation: the seed depends only on the master seed
/// and the key path, never on execution order.
inline Rng derive_stream(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t s = mix64(master);
    for (std::uint64_t k : keys) {
        s = mix64(s ^ mix64(k + 0x632be59bd9b4e019ULL));
    }
    return Rng(s);
}

} // namespace cvdoe
