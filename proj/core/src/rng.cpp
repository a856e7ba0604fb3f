#include "argonet/rng.hpp"

#include <cmath>
#include <numbers>

namespace argonet {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_name(std::string_view name) {
    // FNV-1a
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t parent, std::string_view component, std::uint64_t index) {
    return splitmix64(splitmix64(parent ^ hash_name(component)) + splitmix64(index + 1));
}

double uniform_from_key(std::uint64_t key) {
    // 53 random bits mapped to the open interval (0, 1).
    const std::uint64_t bits = splitmix64(key) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double normal_from_key(std::uint64_t key) {
    const double u1 = uniform_from_key(key);
    const double u2 = uniform_from_key(key ^ 0xD1B54A32D192ED03ULL);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

__extension__ typedef unsigned __int128 u128;

std::uint64_t index_from_key(std::uint64_t key, std::uint64_t n) {
    const u128 wide = static_cast<u128>(splitmix64(key)) * n;
    return static_cast<std::uint64_t>(wide >> 64);
}

}  // namespace argonet
