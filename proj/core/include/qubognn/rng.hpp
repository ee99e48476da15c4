#pragma once

#include <cstdint>

namespace qgnn::rng {

// splitmix64, used for seeding and for deriving per-purpose streams from a
// single run seed. Standard-library engines are avoided so that results are
// bit-identical across platforms and library versions.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

// xoshiro256** by Blackman and Vigna.
class Xoshiro256ss {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256ss(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& word : s_) word = sm.next();
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    result_type operator()() { return next(); }
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~static_cast<result_type>(0); }

    // uniform in [0, 1), 53 random bits
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n), n > 0; Lemire multiply-shift
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

// Named sub-streams derived from one 64-bit run seed. Streams are
// independent: drawing from one never changes another.
enum class Stream : std::uint64_t {
    features = 0x66656174,
    init = 0x696e6974,
    dropout = 0x64726f70,
    heuristic = 0x68657572,
    graph_gen = 0x67726767,
    seeds = 0x73656564,
};

inline Xoshiro256ss make_stream(std::uint64_t seed, Stream stream) {
    SplitMix64 sm(seed ^ (static_cast<std::uint64_t>(stream) * 0xd6e8feb86659fd93ULL));
    return Xoshiro256ss(sm.next());
}

} // namespace qgnn::rng
