#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mesc {

// Deterministic RNG used everywhere in the project. We avoid the std
// distribution classes because their output is implementation-defined;
// sampling goes through next_double() so outputs are portable.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // modulo bias is negligible for the small n used here, but keep it exact
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Index into a discrete distribution given by (unnormalized is not
    // allowed) probabilities; falls back to the last entry on rounding.
    template <typename GetProb>
    int next_categorical(int n, GetProb prob) {
        double u = next_double();
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += prob(i);
            if (u < acc) return i;
        }
        return n - 1;
    }

    // Derive an independent stream, e.g. one per worker/repeat.
    Rng fork(std::uint64_t salt) {
        Rng r(state_ ^ (0xd1342543de82ef95ULL * (salt + 1)));
        r.next_u64();
        return r;
    }

  private:
    std::uint64_t state_;
};

// Stable seed derivation for independent runs (repeats, grid pairs).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
    Rng r(master ^ (0x9e3779b97f4a7c15ULL * (salt + 0x632be59bd9b4e019ULL)));
    return r.next_u64();
}

// Sample k distinct values from [0, n) without replacement.
inline std::vector<int> sample_without_replacement(Rng& rng, int n, int k,
                                                   const std::vector<bool>& excluded) {
    std::vector<int> pool;
    pool.reserve(n);
    for (int i = 0; i < n; ++i)
        if (!excluded[i]) pool.push_back(i);
    if (static_cast<std::size_t>(k) > pool.size())
        throw std::invalid_argument("sample_without_replacement: not enough candidates");
    std::vector<int> out;
    out.reserve(k);
    for (int j = 0; j < k; ++j) {
        int idx = static_cast<int>(rng.next_below(pool.size()));
        out.push_back(pool[idx]);
        pool[idx] = pool.back();
        pool.pop_back();
    }
    return out;
}

} // namespace mesc
