#include "fracstorm/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <queue>
#include <numbers>
#include <vector>

#include "fracstorm/error.hpp"

namespace fracstorm::quad {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

}  // namespace

namespace {

struct Segment {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk_segment(const Integrand& f, double a, double b) {
    Segment s{a, b};
    s.value = GK::integrate(f, a, b, 0, 0.0, &s.error, &s.l1);
    if (!std::isfinite(s.value)) numerical_fail("quadrature produced a non-finite value");
    return s;
}

// Globally adaptive Gauss-Kronrod (QUADPACK QAG strategy): always bisect the segment with the
// largest error estimate until the summed error meets the tolerance or reaches the round-off floor.
double adaptive(const Integrand& f, std::span<const double> breaks, const Options& opt) {
    std::priority_queue<Segment> heap;
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] >= breaks[i])) domain_fail("quadrature: break points must be increasing");
        if (breaks[i + 1] == breaks[i]) continue;
        Segment s = gk_segment(f, breaks[i], breaks[i + 1]);
        value += s.value;
        error += s.error;
        l1 += s.l1;
        heap.push(s);
    }
    if (heap.empty()) return 0.0;
    const std::size_t max_segments = std::max<std::size_t>(opt.max_segments, breaks.size());
    const double eps = std::numeric_limits<double>::epsilon();
    auto done = [&] {
        return error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(value)) || error <= 50.0 * eps * l1;
    };
    while (!done() && heap.size() < max_segments) {
        const Segment worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;  // cannot split further
        heap.pop();
        const Segment left = gk_segment(f, worst.a, mid);
        const Segment right = gk_segment(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        l1 += left.l1 + right.l1 - worst.l1;
        heap.push(left);
        heap.push(right);
    }
    if (!done()) {
        // recompute the totals exactly (the running sums accumulate cancellation error)
        value = error = l1 = 0.0;
        for (auto h = heap; !h.empty(); h.pop()) {
            value += h.top().value;
            error += h.top().error;
            l1 += h.top().l1;
        }
        if (!done() && error > 1e-6 * l1) {
            char buf[200];
            std::snprintf(buf, sizeof buf,
                          "adaptive Gauss-Kronrod did not converge on [%.6g, %.6g]: estimate %.6g, error %.3g",
                          breaks.front(), breaks.back(), value, error);
            numerical_fail(buf);
        }
    }
    return value;
}

}  // namespace

double integrate(const Integrand& f, double a, double b, Options opt) {
    if (a == b) return 0.0;
    const double br[2] = {std::min(a, b), std::max(a, b)};
    const double v = adaptive(f, br, opt);
    return a < b ? v : -v;
}

double integrate_breaks(const Integrand& f, std::span<const double> breaks, Options opt) {
    if (breaks.size() < 2) return 0.0;
    return adaptive(f, breaks, opt);
}

double integrate_endpoint_singular(const Integrand& f, double a, double b, Options opt) {
    if (a == b) return 0.0;
    thread_local boost::math::quadrature::tanh_sinh<double> ts(15);
    double err = 0.0;
    double l1 = 0.0;
    std::size_t levels = 0;
    const double v = ts.integrate(f, a, b, opt.rel_tol, &err, &l1, &levels);
    if (!std::isfinite(v)) numerical_fail("tanh-sinh quadrature produced a non-finite value");
    if (err > 1e-6 * std::max(l1, 1e-300) && err > opt.abs_tol) {
        numerical_fail("tanh-sinh quadrature did not converge, error estimate " + std::to_string(err));
    }
    return v;
}

double integrate_to_infinity(const Integrand& f, double a, Options opt) {
    auto mapped = [&](double u) {
        const double one_minus = 1.0 - u;
        const double x = a + u / one_minus;
        const double fx = f(x);
        if (fx == 0.0) return 0.0;
        return fx / (one_minus * one_minus);
    };
    return integrate(mapped, 0.0, 1.0, opt);
}

double integrate_half_line(const Integrand& f, double scale, Options opt) {
    return integrate_endpoint_singular(f, 0.0, scale, opt) + integrate_to_infinity(f, scale, opt);
}

GaussRule gauss_legendre(int points) {
    if (points < 1 || points > 128) domain_fail("gauss_legendre: points must lie in [1, 128]");
    struct Rule {
        std::vector<double> x;
        std::vector<double> w;
    };
    static std::mutex mtx;
    static std::map<int, Rule> cache;
    std::lock_guard lock(mtx);
    auto it = cache.find(points);
    if (it == cache.end()) {
        Rule r;
        r.x.resize(points);
        r.w.resize(points);
        const int n = points;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p1 = 1.0;
                double p2 = 0.0;
                for (int j = 1; j <= n; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
                }
                pp = n * (z * p1 - p2) / (z * z - 1.0);
                const double dz = p1 / pp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            r.x[i] = -z;
            r.x[n - 1 - i] = z;
            r.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            r.w[n - 1 - i] = r.w[i];
        }
        it = cache.emplace(points, std::move(r)).first;
    }
    return {it->second.x, it->second.w};
}

}  // namespace fracstorm::quad
