#pragma once

// Counter-based random generator (Philox-4x32-10). Each (seed, stream) pair
// is an independent deterministic sequence, so simulation replicates can be
// assigned their own streams and evaluated in any order or thread layout
// without changing the draws.

#include <cmath>
#include <cstdint>
#include <vector>

namespace pcatest {

class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          stream0_(static_cast<std::uint32_t>(stream)),
          stream1_(static_cast<std::uint32_t>(stream >> 32)) {}

    // uniform on the open interval (0,1), 53-bit resolution
    double uniform() {
        const std::uint64_t bits = next64();
        return (double(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; keeps the second deviate for the next call
    double normal() {
        if (haveSpare_) {
            haveSpare_ = false;
            return spare_;
        }
        const double u1 = uniform(), u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        haveSpare_ = true;
        return r * std::cos(a);
    }

    // uniform direction on the unit sphere in R^k
    std::vector<double> sphere(std::size_t k) {
        std::vector<double> u(k);
        double n2 = 0.0;
        do {
            n2 = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                u[i] = normal();
                n2 += u[i] * u[i];
            }
        } while (n2 < 1e-290);
        const double inv = 1.0 / std::sqrt(n2);
        for (double& x : u) x *= inv;
        return u;
    }

private:
    std::uint64_t next64() {
        if (have32_) {
            have32_ = false;
            return (std::uint64_t(block_[2]) << 32) | block_[3];
        }
        fillBlock();
        have32_ = true;
        return (std::uint64_t(block_[0]) << 32) | block_[1];
    }

    void fillBlock() {
        std::uint32_t c0 = static_cast<std::uint32_t>(counter_);
        std::uint32_t c1 = static_cast<std::uint32_t>(counter_ >> 32);
        std::uint32_t c2 = stream0_, c3 = stream1_;
        std::uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                k0 += 0x9E3779B9u;
                k1 += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * c0;
            const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
        }
        block_[0] = c0;
        block_[1] = c1;
        block_[2] = c2;
        block_[3] = c3;
        ++counter_;
    }

    std::uint32_t key0_, key1_;
    std::uint32_t stream0_, stream1_;
    std::uint64_t counter_ = 0;
    std::uint32_t block_[4] = {0, 0, 0, 0};
    bool have32_ = false;
    bool haveSpare_ = false;
    double spare_ = 0.0;
};

// 64-bit mix (splitmix-style) for deriving per-replicate stream ids from a
// scenario fingerprint and a replicate index.
inline std::uint64_t mixStream(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// FNV-1a over bytes; used to fingerprint scenario configurations.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ull) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace pcatest
