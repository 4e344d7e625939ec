#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace opcalc {

/// Compensated (Neumaier) accumulator; order of add() calls fixes the result.
template <class T>
class KahanSum {
public:
    void add(T x) {
        T t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    T value() const { return sum_ + comp_; }

private:
    T sum_{};
    T comp_{};
};

/// Wynn epsilon limit of a sequence of partial sums.
/// Returns the last entry of the deepest even column; for a sequence whose
/// consecutive differences vanish, the last partial sum.
template <class T>
T wynn_epsilon(std::span<const T> s) {
    const std::size_t n = s.size();
    if (n == 0) return T{};
    if (n < 3) return s[n - 1];
    // prev = column k-1, cur = column k; column entries indexed by start position.
    std::vector<T> prev(n, T{});
    std::vector<T> cur(s.begin(), s.end());
    T best = s[n - 1];
    for (std::size_t k = 1; k < n; ++k) {
        std::vector<T> next(n - k);
        bool ok = true;
        for (std::size_t i = 0; i + k < n; ++i) {
            T diff = cur[i + 1] - cur[i];
            if (diff == T{}) {
                ok = false;
                break;
            }
            next[i] = prev[i + 1] + T(1) / diff;
        }
        if (!ok) break;
        prev = std::move(cur);
        cur = std::move(next);
        if (k % 2 == 0) best = cur.back();
    }
    return best;
}

}  // namespace opcalc
