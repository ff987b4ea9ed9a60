#include "nlcmcr/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlcmcr/errors.hpp"

namespace nlcmcr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Poisson by transformed rejection (Hormann's PTRS), valid for mean >= 10.
long long poisson_ptrs(double mean, RngState& rng) {
    const double log_mean = std::log(mean);
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        double v = rng.uniform();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<long long>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        const double rhs = kf * log_mean - mean - std::lgamma(kf + 1.0);
        if (lhs <= rhs) return static_cast<long long>(kf);
    }
}

long long poisson_small(double mean, RngState& rng) {
    const double limit = std::exp(-mean);
    long long k = 0;
    double prod = rng.uniform();
    while (prod > limit) {
        ++k;
        prod *= rng.uniform();
    }
    return k;
}

// Binomial by transformed rejection (Hormann's BTRS), needs n*p*q reasonably
// large; callers guarantee p <= 0.5 and n*p >= 10.
long long binomial_btrs(long long n, double p, RngState& rng) {
    const double q = 1.0 - p;
    const double nd = static_cast<double>(n);
    const double spq = std::sqrt(nd * p * q);
    const double b = 1.15 + 2.53 * spq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = nd * p + 0.5;
    const double v_r = 0.92 - 4.2 / b;
    const double urvr = 0.86 * v_r;
    const double alpha = (2.83 + 5.1 / b) * spq;
    const double lpq = std::log(p / q);
    const double m = std::floor((nd + 1.0) * p);
    const double h = std::lgamma(m + 1.0) + std::lgamma(nd - m + 1.0);
    for (;;) {
        double u;
        double v = rng.uniform();
        if (v <= urvr) {
            u = v / v_r - 0.43;
            const double us = 0.5 - std::fabs(u);
            return static_cast<long long>(std::floor((2.0 * a / us + b) * u + c));
        }
        if (v >= v_r) {
            u = rng.uniform() - 0.5;
        } else {
            u = v / v_r - 0.93;
            u = (u < 0.0 ? -0.5 : 0.5) - u;
            v = rng.uniform() * v_r;
        }
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + c);
        if (kf < 0.0 || kf > nd) continue;
        v = v * alpha / (a / (us * us) + b);
        if (std::log(v) <=
            h - std::lgamma(kf + 1.0) - std::lgamma(nd - kf + 1.0) + (kf - m) * lpq) {
            return static_cast<long long>(kf);
        }
    }
}

long long binomial_inversion(long long n, double p, RngState& rng) {
    // Count geometric inter-success gaps; O(n*p) expected.
    const double log_q = std::log1p(-p);
    long long count = 0;
    double pos = 0.0;
    for (;;) {
        pos += std::floor(std::log(rng.uniform()) / log_q) + 1.0;
        if (pos > static_cast<double>(n)) return count;
        ++count;
    }
}

}  // namespace

double log_sum_exp(std::span<const double> x) {
    if (x.empty()) throw parameter_error("log_sum_exp: empty input");
    const double m = *std::max_element(x.begin(), x.end());
    if (m == -kInf) return -kInf;
    double sum = 0.0;
    for (double v : x) sum += std::exp(v - m);
    return m + std::log(sum);
}

double sample_gamma(double shape, double rate, RngState& rng) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw parameter_error("sample_gamma: shape and rate must be positive");
    }
    // Marsaglia-Tsang squeeze; shape < 1 boosted through the U^(1/shape) identity.
    double boost = 1.0;
    double a = shape;
    if (a < 1.0) {
        boost = std::pow(rng.uniform(), 1.0 / a);
        a += 1.0;
    }
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x ||
            std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            double r = boost * d * v / rate;
            if (r < kProbFloor) r = kProbFloor;
            return r;
        }
    }
}

double sample_beta(double a, double b, RngState& rng) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw parameter_error("sample_beta: both parameters must be positive");
    }
    const double x = sample_gamma(a, 1.0, rng);
    const double y = sample_gamma(b, 1.0, rng);
    double r = x / (x + y);
    const double eps = std::numeric_limits<double>::epsilon();
    if (r < kProbFloor) r = kProbFloor;
    if (r > 1.0 - eps) r = 1.0 - eps;
    return r;
}

int sample_categorical_log(std::span<const double> log_weights, RngState& rng) {
    if (log_weights.empty()) throw parameter_error("sample_categorical_log: empty weights");
    const double m = *std::max_element(log_weights.begin(), log_weights.end());
    if (m == -kInf || std::isnan(m)) {
        throw degeneracy_error("sample_categorical_log: all weights are zero");
    }
    double total = 0.0;
    for (double lw : log_weights) total += std::exp(lw - m);
    const double target = rng.uniform() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < log_weights.size(); ++i) {
        cum += std::exp(log_weights[i] - m);
        if (target < cum) return static_cast<int>(i);
    }
    return static_cast<int>(log_weights.size()) - 1;
}

int sample_categorical(std::span<const double> probs, RngState& rng) {
    if (probs.empty()) throw parameter_error("sample_categorical: empty probabilities");
    double total = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw parameter_error("sample_categorical: negative probability");
        total += p;
    }
    if (total <= 0.0) throw degeneracy_error("sample_categorical: all probabilities zero");
    const double target = rng.uniform() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        cum += probs[i];
        if (target < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

long long sample_poisson(double mean, RngState& rng) {
    if (mean < 0.0 || !std::isfinite(mean)) {
        throw parameter_error("sample_poisson: mean must be finite and nonnegative");
    }
    if (mean == 0.0) return 0;
    if (mean < 10.0) return poisson_small(mean, rng);
    return poisson_ptrs(mean, rng);
}

long long sample_binomial(long long trials, double p, RngState& rng) {
    if (trials < 0) throw parameter_error("sample_binomial: negative trial count");
    if (p < 0.0 || p > 1.0) throw parameter_error("sample_binomial: p outside [0,1]");
    if (trials == 0 || p == 0.0) return 0;
    if (p == 1.0) return trials;
    if (p > 0.5) return trials - sample_binomial(trials, 1.0 - p, rng);
    if (static_cast<double>(trials) * p < 10.0) return binomial_inversion(trials, p, rng);
    return binomial_btrs(trials, p, rng);
}

long long sample_negative_binomial(double successes, double success_prob, RngState& rng) {
    if (!(successes > 0.0)) {
        throw parameter_error("sample_negative_binomial: success count must be positive");
    }
    if (!(success_prob > 0.0) || !(success_prob < 1.0)) {
        throw parameter_error("sample_negative_binomial: success_prob must lie in (0,1)");
    }
    const double rate = success_prob / (1.0 - success_prob);
    return sample_poisson(sample_gamma(successes, rate, rng), rng);
}

std::vector<long long> sample_multinomial(long long trials, std::span<const double> probs,
                                          RngState& rng) {
    if (trials < 0) throw parameter_error("sample_multinomial: negative trial count");
    if (probs.empty()) throw parameter_error("sample_multinomial: empty probabilities");
    double total = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw parameter_error("sample_multinomial: negative probability");
        total += p;
    }
    if (std::fabs(total - 1.0) > 1e-9) {
        throw parameter_error("sample_multinomial: probabilities must sum to 1 within 1e-9");
    }
    std::vector<long long> counts(probs.size(), 0);
    long long remaining = trials;
    double mass_left = total;
    for (std::size_t i = 0; i + 1 < probs.size() && remaining > 0; ++i) {
        double cond = probs[i] / mass_left;
        cond = std::clamp(cond, 0.0, 1.0);
        counts[i] = sample_binomial(remaining, cond, rng);
        remaining -= counts[i];
        mass_left -= probs[i];
        if (mass_left <= 0.0) break;
    }
    counts.back() += remaining;
    return counts;
}

}  // namespace nlcmcr
