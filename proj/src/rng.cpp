#include "fairbv/rng.hpp"

#include <vector>

namespace fairbv {

namespace {

std::mt19937_64 seeded(std::initializer_list<std::uint64_t> key) {
    std::vector<std::uint32_t> words;
    words.reserve(key.size() * 2);
    for (auto k : key) {
        words.push_back(static_cast<std::uint32_t>(k & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(k >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::initializer_list<std::uint64_t> key) : engine_(seeded(key)) {}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

}  // namespace fairbv
