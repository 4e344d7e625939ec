#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "accel.hpp"
#include "errors.hpp"
#include "rational.hpp"

namespace opcalc::quad {

struct QuadratureResult {
    cplx value{};
    double error = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
    std::string method;
};

struct McResult : QuadratureResult {
    double standard_error = 0.0;
    std::size_t samples = 0;
    bool variance_warning = false;  // standard error above 10% of |value|
};

struct IntegrandHints {
    std::optional<double> phase_scale;  // oscillation zeros spaced pi / phase_scale
    double endpoint_exponent = 0.0;     // integrand ~ x^sigma at 0
    std::optional<double> pole;         // simple pole on the path (principal value)
    std::optional<double> decay_scale;  // integrand ~ exp(-x / decay_scale)

    void validate() const {
        if (!(endpoint_exponent > -1.0)) throw DomainError("endpoint exponent must exceed -1");
        if (phase_scale && !(*phase_scale > 0.0)) throw DomainError("phase scale must be positive");
        if (decay_scale && !(*decay_scale > 0.0)) throw DomainError("decay scale must be positive");
    }
};

/// Integrand value with its own absolute error (used by nested rules).
struct Estimate {
    cplx value;
    double error;
};

inline constexpr int default_max_level = 12;

namespace detail {

inline constexpr double eps = std::numeric_limits<double>::epsilon();
inline constexpr double half_pi = std::numbers::pi / 2.0;

struct Node {
    double x;
    double w;
};

/// x = s exp(t - e^{-t}); double-exponential decay of dx/dt at t -> -inf.
struct HalfLineMap {
    double scale = 1.0;

    std::optional<Node> operator()(double t) const {
        double e = std::exp(-t);
        double x = scale * std::exp(t - e);
        if (!(x > 0.0) || !std::isfinite(x) || x > 1e280) return std::nullopt;
        double w = x * (1.0 + e);
        if (!std::isfinite(w)) return std::nullopt;
        return Node{x, w};
    }
};

/// tanh-sinh on [a, b]; endpoint distances are formed without cancellation.
struct FiniteMap {
    double a;
    double b;

    std::optional<Node> operator()(double t) const {
        double d = 0.5 * (b - a);
        double u = half_pi * std::sinh(t);
        double q = 2.0 / (1.0 + std::exp(2.0 * std::abs(u)));  // 1 - tanh|u|
        double off = d * q;
        if (!(off > 0.0)) return std::nullopt;
        double x = t >= 0.0 ? b - off : a + off;
        if (!(x > a && x < b)) return std::nullopt;
        double w = d * half_pi * std::cosh(t) * q * (2.0 - q);
        if (!(w > 0.0) || !std::isfinite(w)) return std::nullopt;
        return Node{x, w};
    }
};

template <class F>
Estimate evaluate(F& f, double x) {
    using R = std::invoke_result_t<F&, double>;
    if constexpr (std::is_same_v<std::decay_t<R>, Estimate>) {
        return f(x);
    } else {
        return Estimate{cplx(f(x)), 0.0};
    }
}

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Level-doubling trapezoidal rule in the DE variable. Level L uses step 2^-L;
/// each level adds only the odd-index nodes.
template <class Map, class F>
QuadratureResult de_integrate(const Map& map, F&& f, double tol, std::string method,
                              int max_level = default_max_level) {
    const double trunc = std::clamp(tol * 1e-6, 1e-20, 1e-12);
    KahanSum<cplx> total;
    double abs_total = 0.0;
    double inner_err = 0.0;  // sum of |w| * nested error, unscaled by h
    double max_term = 0.0;
    std::size_t evals = 0;
    cplx prev{};
    QuadratureResult res;
    res.method = std::move(method);

    auto visit = [&](double t) -> std::optional<double> {
        auto node = map(t);
        if (!node) return std::nullopt;
        Estimate v = evaluate(f, node->x);
        ++evals;
        if (!finite(v.value)) throw NonFiniteSample("non-finite integrand value", node->x);
        cplx term = node->w * v.value;
        total.add(term);
        double mag = std::abs(term);
        abs_total += mag;
        inner_err += node->w * v.error;
        max_term = std::max(max_term, mag);
        return mag;
    };

    auto walk = [&](double h, long start, long step, double dir) {
        int small = 0;
        for (long j = start;; j += step) {
            double t = dir * static_cast<double>(j) * h;
            auto mag = visit(t);
            if (!mag) break;
            if (*mag <= trunc * max_term) {
                if (++small >= 3 && std::abs(t) >= 1.0) break;
            } else {
                small = 0;
            }
        }
    };

    for (int level = 0; level <= max_level; ++level) {
        double h = std::ldexp(1.0, -level);
        if (level == 0) {
            visit(0.0);
            walk(h, 1, 1, 1.0);
            walk(h, 1, 1, -1.0);
        } else {
            walk(h, 1, 2, 1.0);
            walk(h, 1, 2, -1.0);
        }
        cplx s = h * total.value();
        res.value = s;
        res.evaluations = evals;
        double floor = 16.0 * eps * h * abs_total;
        double nested = h * inner_err;
        if (level >= 1) {
            double diff = std::abs(s - prev);
            res.error = std::max(diff, floor) + nested;
            bool ok = diff <= tol * std::abs(s) || diff <= floor;
            if (level >= 3 && ok && nested <= tol * std::max(std::abs(s), floor)) {
                res.converged = true;
                return res;
            }
        }
        prev = s;
    }
    return res;
}

}  // namespace detail

/// Integral over [0, inf). Oscillatory hints route to integrate_oscillatory,
/// pole hints to integrate_pv.
template <class F>
QuadratureResult integrate_halfline(F&& f, double tol, const IntegrandHints& hints = {});

/// Integral over [a, b] by tanh-sinh; integrable endpoint singularities allowed.
template <class F>
QuadratureResult integrate_finite(F&& f, double a, double b, double tol,
                                  int max_level = default_max_level) {
    if (!(b > a)) throw DomainError("integrate_finite requires a < b");
    return detail::de_integrate(detail::FiniteMap{a, b}, std::forward<F>(f), tol, "tanh-sinh", max_level);
}

/// Conditionally convergent half-line integral: segments between multiples of
/// pi/omega, partial sums accelerated by the epsilon algorithm. At most 400 segments.
template <class F>
QuadratureResult integrate_oscillatory(F&& f, double tol, double omega) {
    if (!(omega > 0.0)) throw DomainError("phase scale must be positive");
    constexpr int cap = 400;
    constexpr std::size_t window = 40;
    const double step = std::numbers::pi / omega;
    std::vector<cplx> partial;
    KahanSum<cplx> running;
    QuadratureResult res;
    res.method = "oscillatory-epsilon";
    double seg_err = 0.0;
    cplx last{};
    int stable = 0;
    for (int k = 0; k < cap; ++k) {
        auto seg = integrate_finite(f, k * step, (k + 1) * step, tol * 1e-2);
        res.evaluations += seg.evaluations;
        seg_err += seg.error;
        running.add(seg.value);
        partial.push_back(running.value());
        std::size_t from = partial.size() > window ? partial.size() - window : 0;
        cplx est = wynn_epsilon<cplx>(std::span<const cplx>(partial).subspan(from));
        if (k >= 5) {
            double diff = std::abs(est - last);
            res.value = est;
            res.error = diff + seg_err;
            if (diff <= tol * std::abs(est) || diff == 0.0) {
                if (++stable >= 2) {
                    res.converged = res.error <= tol * std::max(std::abs(est), 1e-300) || diff == 0.0;
                    return res;
                }
            } else {
                stable = 0;
            }
        }
        last = est;
    }
    return res;
}

/// Symmetric window integral  int_0^{half} [F(x0 - u) + F(x0 + u)] du.
/// The paired sum is regular at u = 0 for a simple pole; below u = 1e-7 x0
/// the pair value is frozen at the cutoff to avoid cancellation noise.
/// The offset is snapped so that x0 + v and x0 - v are both exact.
template <class F>
QuadratureResult pv_symmetric_window(F&& f, double x0, double half, double tol) {
    const double cut = 1e-7 * x0;
    auto pair = [&](double u) -> cplx {
        volatile double hi = x0 + std::max(u, cut);
        double v = hi - x0;
        return cplx(f(x0 - v)) + cplx(f(x0 + v));
    };
    auto r = integrate_finite(pair, 0.0, half, tol);
    r.method = "pv-window";
    return r;
}

/// Principal value over [0, inf) through a simple pole at x0 > 0. A pole at
/// x0 <= 0 is off the path and the ordinary half-line rule is used.
template <class F>
QuadratureResult integrate_pv(F&& f, double x0, double tol, double decay_scale = 1.0) {
    if (!(x0 > 0.0)) return detail::de_integrate(detail::HalfLineMap{decay_scale}, f, tol, "exp-sinh");
    // Residue diagnostics: a_j = u (F(x0+u) - F(x0-u)) / 2 -> R with O(u^2)
    // error; s_j = u (F(x0+u) + F(x0-u)) -> 0 for a simple pole at x0.
    std::vector<double> a;
    double s_last = 0.0;
    for (int j = 4; j <= 20; ++j) {
        double u = std::ldexp(x0, -j);
        cplx fp = cplx(f(x0 + u));
        cplx fm = cplx(f(x0 - u));
        if (!detail::finite(fp) || !detail::finite(fm)) throw NonFiniteSample("non-finite value near pole", x0);
        a.push_back(std::abs(0.5 * u * (fp - fm)));
        s_last = std::abs(u * (fp + fm));
    }
    // Richardson on the last three a_j (ratio 4 per halving).
    std::size_t m = a.size();
    double r1 = (4.0 * a[m - 1] - a[m - 2]) / 3.0;
    double r0 = (4.0 * a[m - 2] - a[m - 3]) / 3.0;
    double residue = (16.0 * r1 - r0) / 15.0;
    if (!(residue > 0.0) || std::abs(a[m - 1] - a[m - 2]) > 1e-3 * residue || s_last > 1e-3 * residue)
        throw PoleLocationError("no simple pole at x0 = " + format_double(x0));

    double half = 0.5 * x0;
    auto left = integrate_finite(f, 0.0, half, tol * 0.1);
    auto mid = pv_symmetric_window(f, x0, half, tol * 0.1);
    double start = x0 + half;
    auto tail = detail::de_integrate(detail::HalfLineMap{decay_scale}, [&](double y) { return cplx(f(start + y)); },
                                     tol * 0.1, "exp-sinh");
    QuadratureResult res;
    res.method = "principal-value";
    res.value = left.value + mid.value + tail.value;
    res.error = left.error + mid.error + tail.error;
    res.evaluations = left.evaluations + mid.evaluations + tail.evaluations + 2 * a.size();
    res.converged = left.converged && mid.converged && tail.converged;
    return res;
}

template <class F>
QuadratureResult integrate_halfline(F&& f, double tol, const IntegrandHints& hints) {
    hints.validate();
    if (hints.pole) return integrate_pv(f, *hints.pole, tol, hints.decay_scale.value_or(1.0));
    if (hints.phase_scale) return integrate_oscillatory(f, tol, *hints.phase_scale);
    double scale = hints.decay_scale.value_or(1.0);
    return detail::de_integrate(detail::HalfLineMap{scale}, std::forward<F>(f), tol, "exp-sinh");
}

/// Iterated double-exponential rule over [0, inf)^k, k in {2, 3}; inner
/// errors are propagated into the outer estimate. k = 3 requires decay hints
/// on every axis (otherwise use integrate_mc).
template <class F>
QuadratureResult integrate_box(F&& f, int k, double tol, std::span<const IntegrandHints> hints) {
    if (k != 2 && k != 3) throw DimensionError("integrate_box supports k = 2 or 3");
    if (!hints.empty() && static_cast<int>(hints.size()) != k) throw DimensionError("one hint per axis");
    std::vector<IntegrandHints> h(hints.begin(), hints.end());
    if (h.empty()) h.resize(k);
    for (auto& x : h) {
        x.validate();
        if (x.pole) throw DomainError("integrate_box does not support principal values");
    }
    if (k == 3)
        for (auto& x : h)
            if (!x.decay_scale) throw DomainError("3D box integration requires decay hints on every axis");

    std::array<double, 3> point{};
    std::size_t evals = 0;
    const double inner_tol = tol * 0.05;

    std::function<Estimate(int, double)> level_fn;
    // Integrates axes axis..k-1 with point[0..axis-1] fixed.
    auto integrate_from = [&](int axis) -> QuadratureResult {
        auto g = [&, axis](double x) -> Estimate { return level_fn(axis, x); };
        double t = axis == 0 ? tol : inner_tol;
        if (h[axis].phase_scale) return integrate_oscillatory(g, t, *h[axis].phase_scale);
        return detail::de_integrate(detail::HalfLineMap{h[axis].decay_scale.value_or(1.0)}, g, t, "exp-sinh");
    };
    level_fn = [&](int axis, double x) -> Estimate {
        point[axis] = x;
        if (axis == k - 1) {
            ++evals;
            return Estimate{cplx(f(std::span<const double>(point.data(), k))), 0.0};
        }
        auto r = integrate_from(axis + 1);
        return Estimate{r.value, r.converged ? r.error : std::max(r.error, std::abs(r.value))};
    };
    auto outer = integrate_from(0);
    outer.evaluations = evals;
    outer.method = "iterated-exp-sinh";
    return outer;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Uniform in (0, 1] from (seed, sample index, axis); no generator state.
inline double counter_uniform(std::uint64_t seed, std::uint64_t index, unsigned axis) {
    std::uint64_t r = splitmix64(splitmix64(seed ^ 0xD1B54A32D192ED03ULL) ^ (index * 4 + axis));
    return (static_cast<double>(r >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace detail

/// Monte Carlo over [0, inf)^3 with density prod exp(-x_i/s_i)/s_i. Samples
/// are grouped in fixed blocks whose sums are combined in block order, so the
/// result depends only on (seed, samples).
template <class F>
McResult integrate_mc(F&& f, std::array<double, 3> scales, std::size_t samples, std::uint64_t seed,
                      unsigned threads = 0) {
    for (double s : scales)
        if (!(s > 0.0)) throw DomainError("importance scales must be positive");
    if (samples == 0) throw DomainError("sample count must be positive");
    constexpr std::size_t block = 4096;
    const std::size_t nblocks = (samples + block - 1) / block;
    std::vector<double> sum(nblocks, 0.0), sum2(nblocks, 0.0);

    auto run_block = [&](std::size_t b) {
        KahanSum<double> s1, s2;
        std::size_t end = std::min(samples, (b + 1) * block);
        for (std::size_t i = b * block; i < end; ++i) {
            std::array<double, 3> x{};
            double density = 1.0;
            for (unsigned a = 0; a < 3; ++a) {
                double u = detail::counter_uniform(seed, i, a);
                x[a] = -scales[a] * std::log(u);
                density *= u / scales[a];
            }
            double v = f(std::span<const double>(x.data(), 3));
            if (!std::isfinite(v)) throw NonFiniteSample("non-finite Monte Carlo sample", x[0]);
            double val = v / density;
            s1.add(val);
            s2.add(val * val);
        }
        sum[b] = s1.value();
        sum2[b] = s2.value();
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, nblocks));
    if (threads <= 1) {
        for (std::size_t b = 0; b < nblocks; ++b) run_block(b);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t b = t; b < nblocks; b += threads) run_block(b);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    KahanSum<double> t1, t2;
    for (std::size_t b = 0; b < nblocks; ++b) {
        t1.add(sum[b]);
        t2.add(sum2[b]);
    }
    const double n = static_cast<double>(samples);
    const double mean = t1.value() / n;
    const double var = std::max(0.0, t2.value() / n - mean * mean);
    McResult res;
    res.method = "monte-carlo";
    res.value = mean;
    res.standard_error = std::sqrt(var / n);
    res.error = res.standard_error;
    res.samples = samples;
    res.evaluations = samples;
    res.converged = true;
    res.variance_warning = res.standard_error > 0.1 * std::abs(mean);
    return res;
}

}  // namespace opcalc::quad
