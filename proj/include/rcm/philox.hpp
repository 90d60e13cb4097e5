#pragma once

#include <cmath>
#include <cstdint>

namespace rcm {

// Philox4x32-10 counter-based generator. Chosen over the standard library
// engines because the output stream is fixed by the algorithm itself, so a
// seed pins a sample path bit-for-bit across platforms and toolchains.
class Philox {
public:
    explicit Philox(std::uint64_t seed) : key0_(static_cast<std::uint32_t>(seed)),
                                          key1_(static_cast<std::uint32_t>(seed >> 32)) {}

    std::uint32_t next_u32() {
        if (have_ == 0) {
            block(counter_++);
            have_ = 4;
        }
        return out_[4 - have_--];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    // Uniform in (0,1): 53-bit mantissa, never exactly 0 or 1.
    double next_uniform() {
        const std::uint64_t bits = next_u64() >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; pairs are consumed in a fixed order.
    double next_gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b) {
        return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) >> 32);
    }
    static std::uint32_t mullo(std::uint32_t a, std::uint32_t b) {
        return a * b;
    }

    void block(std::uint64_t ctr) {
        std::uint32_t c0 = static_cast<std::uint32_t>(ctr);
        std::uint32_t c1 = static_cast<std::uint32_t>(ctr >> 32);
        std::uint32_t c2 = 0, c3 = 0;
        std::uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            const std::uint32_t hi0 = mulhi(0xD2511F53u, c0);
            const std::uint32_t lo0 = mullo(0xD2511F53u, c0);
            const std::uint32_t hi1 = mulhi(0xCD9E8D57u, c2);
            const std::uint32_t lo1 = mullo(0xCD9E8D57u, c2);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0; c1 = n1; c2 = n2; c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        out_[0] = c0; out_[1] = c1; out_[2] = c2; out_[3] = c3;
    }

    std::uint32_t key0_, key1_;
    std::uint64_t counter_ = 0;
    std::uint32_t out_[4] = {0, 0, 0, 0};
    int have_ = 0;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace rcm
