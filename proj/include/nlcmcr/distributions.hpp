#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nlcmcr/rng.hpp"

namespace nlcmcr {

// Probabilities are clamped to at least this value before taking logs.
inline constexpr double kProbFloor = 1e-300;

// log(sum_i exp(x[i])), max-shifted. Entries may be -inf; at least one
// entry must be finite.
double log_sum_exp(std::span<const double> x);

// Beta(a, b). Result clamped to the open interval (0,1).
double sample_beta(double a, double b, RngState& rng);

// Gamma in the shape-rate parameterization: mean = shape / rate.
double sample_gamma(double shape, double rate, RngState& rng);

// Index i with probability exp(lw[i] - logsumexp(lw)). Entries may be
// -inf (zero probability); all -inf is a degenerate distribution.
int sample_categorical_log(std::span<const double> log_weights, RngState& rng);

// Categorical over already-normalized probabilities (renormalized
// internally against rounding drift).
int sample_categorical(std::span<const double> probs, RngState& rng);

// Poisson(mean). Exact for any mean >= 0 (inversion for small means,
// transformed rejection for large ones).
long long sample_poisson(double mean, RngState& rng);

// Binomial(trials, p).
long long sample_binomial(long long trials, double p, RngState& rng);

// Number of failures before the successes-th success; each trial
// succeeds with probability success_prob. Drawn as a Gamma-Poisson
// mixture so it stays cheap for large `successes`.
long long sample_negative_binomial(double successes, double success_prob, RngState& rng);

// Multinomial counts; probs must be nonnegative and sum to 1 within 1e-9.
std::vector<long long> sample_multinomial(long long trials, std::span<const double> probs,
                                          RngState& rng);

}  // namespace nlcmcr
