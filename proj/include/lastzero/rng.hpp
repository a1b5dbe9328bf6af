// Counter-based random numbers. Each draw is a pure function of
// (key, counter), where the key mixes a master seed with a path index and a
// purpose tag, so any path (or any draw within it) can be regenerated without
// touching the others.
#pragma once

#include <cmath>
#include <cstdint>

namespace lastzero {

inline std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Purposes keep streams for different random decisions disjoint.
enum class Stream : std::uint64_t {
    Increments = 1,  // Gaussian increments
    BridgeMin = 2,   // one draw per segment: bridge minimum
    Refine = 3,      // sub-grid bridges for rule firing
    Auxiliary = 4,   // estimator-specific decisions
    Jumps = 5,       // jump epochs and sizes
};

class CounterRng {
public:
    CounterRng(std::uint64_t master_seed, std::uint64_t path_index, Stream stream)
        : key_(splitmix64(splitmix64(master_seed) ^ splitmix64(path_index * 8 + static_cast<std::uint64_t>(stream))))
    {}

    // Random access: the draw at a given counter value.
    std::uint64_t at(std::uint64_t counter) const { return splitmix64(key_ ^ splitmix64(counter)); }
    double uniform_at(std::uint64_t counter) const { return to_open01(at(counter)); }

    // Sequential use.
    std::uint64_t next() { return at(counter_++); }
    double uniform() { return to_open01(next()); }
    double exponential(double rate) { return -std::log(uniform()) / rate; }
    double normal()
    {
        if (has_spare_) { has_spare_ = false; return spare_; }
        double u1 = uniform(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t counter() const { return counter_; }
    void seek(std::uint64_t c) { counter_ = c; has_spare_ = false; }

    // Uniform on (0, 1): never returns 0, so logs are safe.
    static double to_open01(std::uint64_t x) { return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace lastzero
