#pragma once

#include <cstdint>
#include <vector>

#include "nlcmcr/data.hpp"

namespace nlcmcr {

// Exact (to quadrature error) posterior of N for the single-cell model,
// truncated to [n, N_max].
struct GridPosterior {
    long long n = 0;
    long long N_max = 0;
    int grid_points = 0;
    std::vector<double> log_post;  // unnormalized, indexed by N - n
    std::vector<double> marginal;  // normalized probabilities over [n, N_max]

    double cdf(long long N) const;
    double mean() const;
};

// Product-Bernoulli capture model with one latent cell: lambda_s ~ Beta(1,1)
// integrated over a regular midpoint grid, prior on N proportional to 1/N.
GridPosterior grid_posterior_single_cell(const PatternCountTable& data, int S, long long N_max,
                                         int grid_points = 201);

// Kolmogorov-Smirnov distance between integer draws and the grid marginal.
double ks_distance(const std::vector<long long>& draws, const GridPosterior& oracle);

// Brute-force top-layer assignment weights for one small group: sums the
// joint over every bottom-class configuration instead of using the
// product-of-sums identity. Refuses more than 3 records or more than
// 3 classes per layer.
std::vector<double> enumerate_step1_weights(
    const std::vector<std::uint32_t>& record_bits, int S,
    const std::vector<double>& top_weights,
    const std::vector<std::vector<double>>& bottom_weights,
    const std::vector<std::vector<std::vector<double>>>& lambda);

}  // namespace nlcmcr
