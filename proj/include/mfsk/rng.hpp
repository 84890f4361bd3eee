#pragma once

#include <cstdint>
#include <random>

namespace mfsk {

// SplitMix64 finalizer; used to derive independent substream seeds.
std::uint64_t mix64(std::uint64_t x);

// Seedable generator with deterministic substreams. A substream is fully
// determined by (seed, stream index), so frames can be generated in any
// order or in parallel.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    static Rng substream(std::uint64_t seed, std::uint64_t index);
    static Rng substream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index);

    double uniform(double lo = 0.0, double hi = 1.0);
    double normal(double mean = 0.0, double stddev = 1.0);
    // Uniform integer in [lo, hi].
    int uniform_int(int lo, int hi);
    std::uint64_t next() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// Stream tags keep substreams of different consumers apart.
namespace stream {
inline constexpr std::uint64_t kFrame = 0x6672616d65ULL;
inline constexpr std::uint64_t kInterference = 0x696e7466ULL;
inline constexpr std::uint64_t kShuffle = 0x73687566ULL;
inline constexpr std::uint64_t kInit = 0x696e6974ULL;
inline constexpr std::uint64_t kTestSet = 0x74657374ULL;
inline constexpr std::uint64_t kBaseline = 0x62617365ULL;
}  // namespace stream

}  // namespace mfsk
