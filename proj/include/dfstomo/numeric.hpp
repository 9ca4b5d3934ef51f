#ifndef DFSTOMO_NUMERIC_HPP
#define DFSTOMO_NUMERIC_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace dfstomo {

// Pairwise (cascade) summation over f(i), i in [lo, hi).  The reduction tree
// depends only on the index range, so results are identical for any thread
// partition that splits work elsewhere.
template <typename F>
double pairwise_sum(std::size_t lo, std::size_t hi, F&& f) {
    const std::size_t n = hi - lo;
    if (n <= 64) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        return s;
    }
    const std::size_t mid = lo + n / 2;
    return pairwise_sum(lo, mid, f) + pairwise_sum(mid, hi, f);
}

inline double pairwise_sum(std::span<const double> v) {
    return pairwise_sum(std::size_t{0}, v.size(), [&](std::size_t i) { return v[i]; });
}

inline double sample_mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    return pairwise_sum(v) / static_cast<double>(v.size());
}

inline double sample_variance(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double mu = sample_mean(v);
    const double ss = pairwise_sum(std::size_t{0}, v.size(), [&](std::size_t i) {
        const double d = v[i] - mu;
        return d * d;
    });
    return ss / static_cast<double>(v.size() - 1);
}

// Adaptive Simpson quadrature with absolute tolerance.
namespace detail {
template <typename F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
} // namespace detail

// Initial uniform panels keep node-aligned or oscillatory integrands from
// fooling the early convergence test.
template <typename F>
double integrate(F f, double a, double b, double tol = 1e-10, int max_depth = 48,
                 int panels = 64) {
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + k * h;
        const double hi = (k + 1 == panels) ? b : lo + h;
        const double m = 0.5 * (lo + hi);
        const double fa = f(lo), fm = f(m), fb = f(hi);
        const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += detail::simpson_step(f, lo, hi, fa, fm, fb, whole, tol / panels, max_depth);
    }
    return total;
}

// Composite Simpson over a uniformly sampled table (n odd).
inline double simpson_table(std::span<const double> y, double h) {
    const std::size_t n = y.size();
    if (n < 2) return 0.0;
    double s = 0.0;
    std::size_t i = 0;
    for (; i + 2 < n; i += 2) s += y[i] + 4.0 * y[i + 1] + y[i + 2];
    s *= h / 3.0;
    if (i + 1 < n) s += 0.5 * h * (y[i] + y[i + 1]); // trapezoid tail for even counts
    return s;
}

// Static-partition parallel loop over [0, n); fn(begin, end) per chunk.
inline void parallel_chunks(std::size_t n, int threads,
                            const std::function<void(std::size_t, std::size_t)>& fn) {
    if (threads <= 1 || n < 2) {
        fn(0, n);
        return;
    }
    const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(t);
    const std::size_t chunk = (n + t - 1) / t;
    for (std::size_t k = 0; k < t; ++k) {
        const std::size_t lo = k * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(fn, lo, hi);
    }
    for (auto& th : pool) th.join();
}

} // namespace dfstomo

#endif
