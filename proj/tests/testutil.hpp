#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace testutil {

inline double mean(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += v;
    return acc / static_cast<double>(x.size());
}

inline double variance(std::span<const double> x) {
    const double m = mean(x);
    double acc = 0.0;
    for (double v : x) acc += (v - m) * (v - m);
    return acc / static_cast<double>(x.size() - 1);
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double stat = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        stat = std::max(stat, std::fabs(static_cast<double>(i) / na -
                                        static_cast<double>(j) / nb));
    }
    return stat;
}

// Critical KS value at significance alpha (asymptotic formula).
inline double ks_critical(std::size_t na, std::size_t nb, double alpha) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c * std::sqrt((static_cast<double>(na) + static_cast<double>(nb)) /
                         (static_cast<double>(na) * static_cast<double>(nb)));
}

// Regularized upper incomplete gamma Q(a, x), for chi-square tail areas.
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
    if (x == 0.0) return 1.0;
    const double log_pre = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1.0) {
        // Series for P, then Q = 1 - P.
        double term = 1.0 / a;
        double sum = term;
        for (int k = 1; k < 1000; ++k) {
            term *= x / (a + k);
            sum += term;
            if (term < sum * 1e-15) break;
        }
        return 1.0 - std::exp(log_pre) * sum;
    }
    // Lentz continued fraction for Q.
    double b = x + 1.0 - a;
    double c = 1e300;
    double d = 1.0 / b;
    double h = d;
    for (int k = 1; k < 1000; ++k) {
        const double an = -static_cast<double>(k) * (static_cast<double>(k) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-15) break;
    }
    return std::exp(log_pre) * h;
}

// Upper tail of chi-square with df degrees of freedom.
inline double chi_square_pvalue(double stat, double df) {
    return gamma_q(df / 2.0, stat / 2.0);
}

// Pearson statistic for observed counts against expected counts.
inline double chi_square_stat(std::span<const long long> observed,
                              std::span<const double> expected) {
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double diff = static_cast<double>(observed[i]) - expected[i];
        stat += diff * diff / expected[i];
    }
    return stat;
}

// Standard error of the mean of a correlated series via batch means.
inline double batch_means_se(std::span<const double> x, std::size_t batches = 50) {
    const std::size_t len = x.size() / batches;
    if (len < 2) throw std::invalid_argument("series too short for batch means");
    std::vector<double> bm(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < len; ++i) acc += x[b * len + i];
        bm[b] = acc / static_cast<double>(len);
    }
    return std::sqrt(variance(bm) / static_cast<double>(batches));
}

}  // namespace testutil
