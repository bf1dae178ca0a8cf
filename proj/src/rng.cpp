#include "pfa/rng.hpp"

#include <vector>

namespace pfa {

Rng::Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
    std::vector<std::uint32_t> words;
    words.reserve(2 * (stream.size() + 1) + 1);
    auto push = [&](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    words.push_back(static_cast<std::uint32_t>(stream.size()));
    for (std::uint64_t s : stream) push(s);
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
}

double Rng::uniform() {
    // 53 random bits mapped to the midpoints of a grid on (0,1).
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace pfa
