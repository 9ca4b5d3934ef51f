#ifndef DFSTOMO_RANDOM_HPP
#define DFSTOMO_RANDOM_HPP

#include <cmath>
#include <cstdint>

namespace dfstomo {

namespace detail {

// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace detail

// Counter-based stream: every (seed, stream, index) triple owns an
// independent sequence, so per-sample generation is reproducible no matter
// how work is split across threads.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(detail::mix64(seed + GOLDEN)) {}

    static RandomStream split(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
        std::uint64_t s = detail::mix64(seed + GOLDEN);
        s = detail::mix64(s ^ (stream + GOLDEN));
        s = detail::mix64(s ^ (index + GOLDEN));
        RandomStream r(0);
        r.state_ = s;
        return r;
    }

    std::uint64_t next_u64() {
        state_ += GOLDEN;
        return detail::mix64(state_);
    }

    // uniform on [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1]
    double uniform_pos() { return 1.0 - uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // standard normal, Box-Muller (cosine half only; streams are short-lived)
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(TWO_PI * u2);
    }

    // Gamma(shape 3/2, scale 1), Marsaglia-Tsang squeeze method
    double gamma_three_halves() {
        constexpr double d = 1.5 - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

private:
    static constexpr std::uint64_t GOLDEN = 0x9E3779B97F4A7C15ull;
    static constexpr double TWO_PI = 6.283185307179586476925286766559;
    std::uint64_t state_;
};

} // namespace dfstomo

#endif
