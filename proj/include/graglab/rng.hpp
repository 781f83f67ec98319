#pragma once
// Seeded RNG helpers. mt19937_64's raw output sequence is pinned by the
// standard; distributions are not, so ranges are derived here by hand to
// keep corpora and reports byte-identical across platforms.

#include <cstdint>
#include <random>
#include <vector>

namespace graglab {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Uniform in [0, n). n == 0 returns 0.
    std::size_t below(std::size_t n) {
        if (n < 2) return 0;
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return static_cast<std::size_t>(v % n);
    }

    // Uniform in [lo, hi] inclusive.
    int range(int lo, int hi) {
        if (hi <= lo) return lo;
        return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo + 1)));
    }

    double real01() { return static_cast<double>(eng_() >> 11) * (1.0 / 9007199254740992.0); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace graglab
