#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace smoothcert {

inline double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

/// Inverse standard normal CDF by bisection on std_normal_cdf.
inline double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("std_normal_quantile: p must lie in (0,1)");
    }
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        double mid = 0.5 * (lo + hi);
        if (std_normal_cdf(mid) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline double log_choose(std::uint64_t n, std::uint64_t k) {
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
           std::lgamma(double(n - k) + 1.0);
}

/// P[Binomial(n,p) >= k], computed from the dominant term outward so the
/// result stays accurate for tails far below 1.
inline double binomial_tail_geq(std::uint64_t k, std::uint64_t n, double p) {
    if (k == 0) return 1.0;
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    double q = 1.0 - p;
    // Upper tail when k sits above the mean; otherwise 1 - lower tail.
    if (double(k) > double(n) * p) {
        double log_t = log_choose(n, k) + double(k) * std::log(p) + double(n - k) * std::log(q);
        double t = std::exp(log_t);
        double sum = t;
        for (std::uint64_t j = k; j < n; ++j) {
            t *= (double(n - j) / double(j + 1)) * (p / q);
            sum += t;
            if (t < sum * 1e-18) break;
        }
        return std::min(sum, 1.0);
    }
    std::uint64_t m = k - 1;  // lower tail P[X <= m], terms shrink as j decreases
    double log_t = log_choose(n, m) + double(m) * std::log(p) + double(n - m) * std::log(q);
    double t = std::exp(log_t);
    double sum = t;
    for (std::uint64_t j = m; j > 0; --j) {
        t *= (double(j) / double(n - j + 1)) * (q / p);
        sum += t;
        if (t < sum * 1e-18) break;
    }
    return std::max(1.0 - sum, 0.0);
}

/// One-sided Clopper-Pearson lower confidence bound at level 1-alpha:
/// the p solving P[Binomial(n,p) >= k] = alpha, found by bisection on the
/// exact binomial tail sum.
inline double clopper_pearson_lower(std::uint64_t k, std::uint64_t n, double alpha) {
    if (n == 0 || k > n) {
        throw std::domain_error("clopper_pearson_lower: need 0 <= k <= n, n >= 1");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error("clopper_pearson_lower: alpha must lie in (0,1)");
    }
    if (k == 0) return 0.0;
    if (k == n) return std::pow(alpha, 1.0 / double(n));
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 100; ++i) {
        double mid = 0.5 * (lo + hi);
        if (binomial_tail_geq(k, n, mid) < alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Exact two-sided p-value for Binomial(n, 1/2): total probability of all
/// outcomes no more likely than the observed k. By symmetry this is
/// P[X <= m] + P[X >= n-m] with m = min(k, n-k).
inline double binom_two_sided_pvalue(std::uint64_t k, std::uint64_t n) {
    if (k > n) throw std::domain_error("binom_two_sided_pvalue: k > n");
    if (n == 0) return 1.0;
    std::uint64_t m = std::min(k, n - k);
    if (m == n - m) return 1.0;
    // P[X <= m] summed downward from the largest term at j = m.
    double log_top = log_choose(n, m) - double(n) * std::log(2.0);
    double rel = 1.0;
    double acc = 1.0;
    for (std::uint64_t j = m; j > 0; --j) {
        rel *= double(j) / double(n - j + 1);
        acc += rel;
        if (rel < acc * 1e-18) break;
    }
    double pval = 2.0 * std::exp(log_top) * acc;
    return std::min(pval, 1.0);
}

}  // namespace smoothcert
