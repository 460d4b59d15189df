#include "randomkit/rng.hpp"

namespace randomkit {

namespace {

std::mt19937_64 keyed_engine(std::uint64_t seed, std::uint64_t config_index, std::uint64_t replicate) {
    auto lo = [](std::uint64_t x) { return static_cast<std::uint32_t>(x & 0xffffffffu); };
    auto hi = [](std::uint64_t x) { return static_cast<std::uint32_t>(x >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), lo(config_index), hi(config_index), lo(replicate), hi(replicate)};
    return std::mt19937_64(seq);
}

}  // namespace

Stream::Stream(std::uint64_t seed, std::uint64_t config_index, std::uint64_t replicate)
    : engine_(keyed_engine(seed, config_index, replicate)) {}

}  // namespace randomkit
