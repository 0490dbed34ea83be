#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace eebo {

/// SplitMix64 finaliser; used to whiten hashed seeds.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace detail {
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) noexcept {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

constexpr std::uint64_t fnv1a_u64(std::uint64_t h, std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffU;
        h *= kFnvPrime;
    }
    return h;
}
}  // namespace detail

/// 64-bit FNV-1a hash of a byte string (config hashes, file identities).
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    return detail::fnv1a(detail::kFnvOffset, bytes);
}

/// Seed derivation rule for named streams:
///   stream_seed = splitmix64(fnv1a(master_seed, problem_id, repeat_index, stream_name))
/// Fields are separated by a 0xff byte so that ("ab","c") and ("a","bc") differ.
constexpr std::uint64_t stream_seed(std::uint64_t master_seed, std::string_view problem_id,
                                    std::uint64_t repeat_index, std::string_view stream_name) noexcept {
    std::uint64_t h = detail::kFnvOffset;
    h = detail::fnv1a_u64(h, master_seed);
    h = detail::fnv1a(h, problem_id);
    h = detail::fnv1a(h, "\xff");
    h = detail::fnv1a_u64(h, repeat_index);
    h = detail::fnv1a(h, stream_name);
    return splitmix64(h);
}

/// Seedable generator with platform-independent derived draws.
///
/// The standard library distributions are implementation defined, so uniform
/// reals and bounded integers are derived from the raw engine output here to
/// keep persisted runs bit-identical across toolchains.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : engine_(splitmix64(seed)) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), rejection sampled.
    std::uint64_t index(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::index: empty range");
        const std::uint64_t limit = max() - (max() % n);
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Independent child generator; consumes one draw from this stream.
    Rng split() { return Rng(engine_() ^ 0xa5a5a5a5a5a5a5a5ULL); }

private:
    std::mt19937_64 engine_;
};

/// The per-run named streams. Strategies draw ε-coins and random choices from
/// `strategy`, evolutionary search from `moea`, hyperparameter restarts from `gp`
/// and duplicate perturbations from `guard`, so a change in one consumer never
/// shifts another's draws.
struct RunStreams {
    Rng design;
    Rng strategy;
    Rng moea;
    Rng gp;
    Rng guard;

    static RunStreams derive(std::uint64_t master_seed, std::string_view problem_id,
                             std::uint64_t repeat_index) {
        // Streams ignore the method, so every strategy shares the initial
        // design of a (problem, repeat) pair and an ε-greedy method with ε = 0
        // replays Exploit exactly.
        return RunStreams{
            Rng(stream_seed(master_seed, problem_id, repeat_index, "design")),
            Rng(stream_seed(master_seed, problem_id, repeat_index, "strategy")),
            Rng(stream_seed(master_seed, problem_id, repeat_index, "moea")),
            Rng(stream_seed(master_seed, problem_id, repeat_index, "gp")),
            Rng(stream_seed(master_seed, problem_id, repeat_index, "guard")),
        };
    }
};

}  // namespace eebo
