#pragma once

#include <cstdint>
#include <random>

namespace rlbd {

// Stateless seed splitter. Component seeds are derived from a master seed and
// a stream id, so adding a new component never perturbs existing streams.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t stream) {
    return std::mt19937_64(split_seed(master, stream));
}

// Fixed stream ids for the components of a run.
namespace stream {
constexpr std::uint64_t env = 0;
constexpr std::uint64_t agent_init = 1;
constexpr std::uint64_t exploration = 2;
constexpr std::uint64_t replay = 3;
constexpr std::uint64_t attacker_init = 4;
constexpr std::uint64_t attacker_data = 5;
constexpr std::uint64_t eval = 6;
constexpr std::uint64_t intensity = 7;
constexpr std::uint64_t baseline = 8;
}  // namespace stream

}  // namespace rlbd
