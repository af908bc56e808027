#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fairbv {

// mt19937_64 and seed_seq are fully specified by the standard; the
// distributions are not, so the conversions below are done by hand to keep
// streams identical across standard libraries.
class Rng {
public:
    explicit Rng(std::initializer_list<std::uint64_t> key);

    std::uint64_t next() { return engine_(); }
    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

}  // namespace fairbv
