#pragma once

#include <cstdint>
#include <string_view>

namespace argonet {

/// Seed derivation. Every random stream in the engine is keyed by
/// (parent seed, component name, index) so that adding a stream never
/// perturbs another one.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_name(std::string_view name);
std::uint64_t derive_seed(std::uint64_t parent, std::string_view component, std::uint64_t index = 0);

/// Counter-based draws: pure functions of their key.
double uniform_from_key(std::uint64_t key);            // in (0, 1)
double normal_from_key(std::uint64_t key);             // standard normal
std::uint64_t index_from_key(std::uint64_t key, std::uint64_t n);  // in [0, n)

}  // namespace argonet
