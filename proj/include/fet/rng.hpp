#pragma once

// Counter-keyed random streams. Every stream is a pure function of
// (seed, trial, round, agent), so parallel trials reproduce exactly no matter
// how the work is scheduled.

#include <cstdint>
#include <limits>

namespace fet {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Satisfies UniformRandomBitGenerator; feeds std:: distributions.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit constexpr Rng(std::uint64_t state) : state_(state) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1).
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Reserved round/agent keys for streams that are not "agent a in round r".
inline constexpr std::uint64_t kInitRound = 0xffffffffffffff01ULL;
inline constexpr std::uint64_t kPlantRound = 0xffffffffffffff02ULL;
inline constexpr std::uint64_t kAggregateAgent = 0xffffffffffffff03ULL;

inline Rng make_stream(std::uint64_t seed, std::uint64_t trial, std::uint64_t round,
                       std::uint64_t agent) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (trial * 0xd1b54a32d192ed03ULL));
    h = splitmix64(h ^ (round * 0xabc98388fb8fac03ULL));
    h = splitmix64(h ^ (agent * 0x8cb92ba72f3d8dd7ULL));
    return Rng(h);
}

}  // namespace fet
