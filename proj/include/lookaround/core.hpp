#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lookaround {

struct Vec3i {
    int x = 0, y = 0, z = 0;
    friend bool operator==(const Vec3i& a, const Vec3i& b) {
        return a.x == b.x && a.y == b.y && a.z == b.z;
    }
    friend bool operator!=(const Vec3i& a, const Vec3i& b) { return !(a == b); }
    friend bool operator<(const Vec3i& a, const Vec3i& b) {
        if (a.x != b.x) return a.x < b.x;
        if (a.y != b.y) return a.y < b.y;
        return a.z < b.z;
    }
};

struct Vec2i {
    int x = 0, y = 0;
    friend bool operator==(const Vec2i& a, const Vec2i& b) { return a.x == b.x && a.y == b.y; }
    friend bool operator<(const Vec2i& a, const Vec2i& b) {
        if (a.x != b.x) return a.x < b.x;
        return a.y < b.y;
    }
};

struct Vec3d {
    double x = 0, y = 0, z = 0;
};

struct Vec3iHash {
    size_t operator()(const Vec3i& v) const {
        uint64_t h = 1469598103934665603ull;
        auto mix = [&h](uint64_t k) {
            h ^= k;
            h *= 1099511628211ull;
        };
        mix(static_cast<uint64_t>(static_cast<uint32_t>(v.x)));
        mix(static_cast<uint64_t>(static_cast<uint32_t>(v.y)));
        mix(static_cast<uint64_t>(static_cast<uint32_t>(v.z)));
        return static_cast<size_t>(h);
    }
};

// Deterministic RNG wrapper. std::normal_distribution is implementation
// defined, so normals come from Box-Muller over splitmix/xoshiro-style
// integers to keep artifacts reproducible across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    uint64_t next_u64() {
        // splitmix64
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    uint64_t uniform_int(uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: n must be > 0");
        // rejection sampling to avoid modulo bias
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = u01();
        } while (u1 <= 0.0);
        u2 = u01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // sample index from a discrete distribution (weights need not be normalized)
    size_t discrete(const std::vector<double>& weights) {
        double total = 0;
        for (double w : weights) total += w;
        if (total <= 0) throw std::invalid_argument("discrete: non-positive total weight");
        double t = u01() * total;
        double acc = 0;
        for (size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (t < acc) return i;
        }
        return weights.size() - 1;
    }

private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0;
};

inline std::vector<double> softmax(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("softmax: empty input");
    double mx = v[0];
    for (double x : v) {
        if (!std::isfinite(x)) throw std::invalid_argument("softmax: non-finite input");
        mx = std::max(mx, x);
    }
    std::vector<double> out(v.size());
    double sum = 0;
    for (size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - mx);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

// Shannon entropy (nats) of a probability vector.
inline double entropy(const std::vector<double>& p) {
    double h = 0;
    for (double x : p) {
        if (x > 0) h -= x * std::log(x);
    }
    return h;
}

inline int argmax(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("argmax: empty input");
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

inline double normalize_angle(double a) {
    a = std::fmod(a, 2.0 * M_PI);
    if (a < 0) a += 2.0 * M_PI;
    return a;
}

}  // namespace lookaround
