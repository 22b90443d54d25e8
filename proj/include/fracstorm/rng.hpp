#pragma once

#include <array>
#include <cstdint>

namespace fracstorm {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11): a keyed bijection of a 128-bit
/// counter. Independent streams are obtained by distinct (key, stream) pairs, so every replicate
/// of a Monte Carlo run draws the same numbers regardless of scheduling.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    /// The raw block function.
    static Counter block(Counter ctr, Key key);

    /// Stream `stream` of generator `seed`: key = seed, counter = (i, 0, stream lo, stream hi).
    Philox4x32(std::uint64_t seed, std::uint64_t stream);

    std::uint32_t next_u32();
    /// Uniform in (0, 1) with 53 random bits.
    double uniform();
    /// Standard normal (Box-Muller, both variates used).
    double normal();

private:
    Key key_{};
    Counter ctr_{};
    Counter buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fracstorm
