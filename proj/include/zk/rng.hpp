#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace zk {

// Stream of standard Gaussians with a splittable seed hierarchy.
// Box-Muller on top of mt19937_64 keeps draws independent of the
// standard library's normal_distribution state machine, so a (seed,
// call-sequence) pair pins every draw.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed)
        : engine_(mix(seed)), seed_base_(seed) {}

    // Child stream for path / worker `index`; children are mutually
    // independent for distinct indices under the same parent seed.
    GaussianStream child(std::uint64_t index) const {
        return GaussianStream(mix(seed_base_) + 0x9e3779b97f4a7c15ULL * (index + 1));
    }

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    void fill(std::vector<double>& out, double stddev) {
        for (double& x : out) x = stddev * next();
    }

private:
    static std::uint64_t mix(std::uint64_t x) {
        // splitmix64 finalizer
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    double uniform() {
        // (0,1], avoids log(0)
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1p-53;
    }

    std::mt19937_64 engine_;
    std::uint64_t seed_base_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// FNV-1a over raw double bits; used to audit that two coupled runs
// consumed the identical increment stream.
class StreamChecksum {
public:
    void update(double x) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(x));
        __builtin_memcpy(&bits, &x, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h_ ^= (bits >> (8 * i)) & 0xffU;
            h_ *= 0x100000001b3ULL;
        }
    }
    void update(const std::vector<double>& xs) {
        for (double x : xs) update(x);
    }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

} // namespace zk
