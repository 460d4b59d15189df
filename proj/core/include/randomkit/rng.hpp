#pragma once

#include <cstdint>
#include <random>

namespace randomkit {

/// Default master seed.
inline constexpr std::uint64_t kDefaultSeed = 314159;

/// Per-replicate random stream.
///
/// Streams are std::mt19937_64 engines keyed by std::seed_seq over the six
/// 32-bit words (low, high) of seed, config_index and replicate. Both the
/// seed_seq mixing and the engine are fully specified by the C++ standard, so
/// a given (seed, config, replicate) triple yields the same stream with any
/// conforming standard library.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t config_index, std::uint64_t replicate);

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

inline Stream child_stream(std::uint64_t seed, std::uint64_t config_index, std::uint64_t replicate) {
    return Stream(seed, config_index, replicate);
}

}  // namespace randomkit
