#pragma once

#include <array>
#include <cstdint>

namespace starlab {

// Philox 4x32-10 counter-based generator: a 10-round bijection over a 128-bit
// counter keyed by 64 bits. Output is a pure function of (key, counter), so
// any partition of the counter space yields independent streams and the draw
// order across streams cannot matter.
struct Philox4x32 {
    static constexpr std::uint32_t mult0 = 0xD2511F53u;
    static constexpr std::uint32_t mult1 = 0xCD9E8D57u;
    static constexpr std::uint32_t weyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t weyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::uint64_t key,
                                              std::array<std::uint32_t, 4> ctr) {
        std::uint32_t k0 = static_cast<std::uint32_t>(key);
        std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(mult0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(mult1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0,
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1,
                   static_cast<std::uint32_t>(p0)};
            k0 += weyl0;
            k1 += weyl1;
        }
        return ctr;
    }
};

// One logical stream (seed, major, minor). The run loop assigns major =
// iteration and minor = trajectory index; draw_at() addresses individual
// draws inside the stream, so a consumer may also read positions directly.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint32_t major, std::uint32_t minor)
        : seed_(seed), major_(major), minor_(minor) {}

    // 64 random bits at an explicit in-stream position; does not advance.
    std::uint64_t bits_at(std::uint64_t draw) const {
        const auto out = Philox4x32::block(
            seed_, {static_cast<std::uint32_t>(draw),
                    static_cast<std::uint32_t>(draw >> 32), minor_, major_});
        return static_cast<std::uint64_t>(out[0]) |
               (static_cast<std::uint64_t>(out[1]) << 32);
    }

    double uniform_at(std::uint64_t draw) const {
        return static_cast<double>(bits_at(draw) >> 11) * 0x1.0p-53;
    }

    // Sequential interface.
    std::uint64_t bits() { return bits_at(next_++); }
    double uniform() { return uniform_at(next_++); }

    // Integer in [0, n) via the multiply-shift reduction (bias < n / 2^64).
    std::uint64_t below(std::uint64_t n) {
        using u128 = unsigned __int128;
        return static_cast<std::uint64_t>((static_cast<u128>(bits()) * n) >> 64);
    }

    std::uint64_t position() const { return next_; }

private:
    std::uint64_t seed_;
    std::uint32_t major_;
    std::uint32_t minor_;
    std::uint64_t next_ = 0;
};

} // namespace starlab
