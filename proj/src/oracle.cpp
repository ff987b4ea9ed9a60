#include "nlcmcr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nlcmcr/distributions.hpp"
#include "nlcmcr/errors.hpp"

namespace nlcmcr {

double GridPosterior::cdf(long long N) const {
    if (N < n) return 0.0;
    const long long idx = std::min(N, N_max) - n;
    double acc = 0.0;
    for (long long i = 0; i <= idx; ++i) acc += marginal[static_cast<std::size_t>(i)];
    return std::min(acc, 1.0);
}

double GridPosterior::mean() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < marginal.size(); ++i) {
        acc += marginal[i] * static_cast<double>(n + static_cast<long long>(i));
    }
    return acc;
}

GridPosterior grid_posterior_single_cell(const PatternCountTable& data, int S, long long N_max,
                                         int grid_points) {
    data.validate();
    if (data.S != S) throw parameter_error("oracle S does not match data");
    if (S > 3) throw parameter_error("oracle restricted to S <= 3");
    if (grid_points < 2) throw parameter_error("oracle needs at least 2 grid points");

    long long n = 0;
    std::vector<long long> captures(static_cast<std::size_t>(S), 0);
    for (const auto& [pattern, count] : data.entries) {
        n += count;
        for (int s = 0; s < S; ++s) {
            if (pattern.bits() & (1u << s)) captures[static_cast<std::size_t>(s)] += count;
        }
    }
    if (n > 200) throw parameter_error("oracle restricted to n <= 200");
    if (N_max < n) throw parameter_error("N_max below observed count");

    GridPosterior out;
    out.n = n;
    out.N_max = N_max;
    out.grid_points = grid_points;

    const std::size_t G = static_cast<std::size_t>(grid_points);
    std::vector<double> log_lam(G), log_one_minus(G);
    for (std::size_t g = 0; g < G; ++g) {
        const double lam = (static_cast<double>(g) + 0.5) / static_cast<double>(G);
        log_lam[g] = std::log(lam);
        log_one_minus[g] = std::log1p(-lam);
    }

    // The single-cell likelihood factorizes over lists, so the S-dimensional
    // grid integral is a product of one-dimensional midpoint sums.
    std::vector<double> terms(G);
    const double log_g = std::log(static_cast<double>(G));
    for (long long N = n; N <= N_max; ++N) {
        double lp = -std::log(static_cast<double>(N)) + std::lgamma(static_cast<double>(N) + 1.0) -
                    std::lgamma(static_cast<double>(N - n) + 1.0);
        for (int s = 0; s < S; ++s) {
            const double c = static_cast<double>(captures[static_cast<std::size_t>(s)]);
            for (std::size_t g = 0; g < G; ++g) {
                terms[g] = c * log_lam[g] + (static_cast<double>(N) - c) * log_one_minus[g];
            }
            lp += log_sum_exp(terms) - log_g;
        }
        out.log_post.push_back(lp);
    }

    const double norm = log_sum_exp(out.log_post);
    out.marginal.reserve(out.log_post.size());
    for (double lp : out.log_post) out.marginal.push_back(std::exp(lp - norm));
    return out;
}

double ks_distance(const std::vector<long long>& draws, const GridPosterior& oracle) {
    if (draws.empty()) throw parameter_error("ks_distance needs draws");
    std::vector<long long> sorted = draws;
    std::sort(sorted.begin(), sorted.end());
    const double m = static_cast<double>(sorted.size());
    double stat = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double f_hi = static_cast<double>(j) / m;
        const double f_lo = static_cast<double>(i) / m;
        stat = std::max({stat, std::fabs(f_hi - oracle.cdf(sorted[i])),
                         std::fabs(f_lo - oracle.cdf(sorted[i] - 1))});
        i = j;
    }
    return stat;
}

std::vector<double> enumerate_step1_weights(
    const std::vector<std::uint32_t>& record_bits, int S,
    const std::vector<double>& top_weights,
    const std::vector<std::vector<double>>& bottom_weights,
    const std::vector<std::vector<std::vector<double>>>& lambda) {
    const std::size_t R = record_bits.size();
    const std::size_t K = top_weights.size();
    if (R == 0 || R > 3) throw parameter_error("enumeration limited to 1..3 records");
    if (K == 0 || K > 3 || bottom_weights.size() != K || lambda.size() != K) {
        throw parameter_error("enumeration limited to 1..3 top classes");
    }
    const std::size_t L = bottom_weights[0].size();
    if (L == 0 || L > 3) throw parameter_error("enumeration limited to 1..3 bottom classes");

    auto record_prob = [&](std::size_t k, std::size_t l, std::uint32_t bits) {
        double p = 1.0;
        for (int s = 0; s < S; ++s) {
            const double lam = lambda[k][l][static_cast<std::size_t>(s)];
            p *= (bits & (1u << s)) ? lam : 1.0 - lam;
        }
        return p;
    };

    std::vector<double> weights(K, 0.0);
    std::vector<std::size_t> config(R, 0);
    for (std::size_t k = 0; k < K; ++k) {
        double total = 0.0;
        std::fill(config.begin(), config.end(), 0);
        while (true) {
            double prod = 1.0;
            for (std::size_t r = 0; r < R; ++r) {
                prod *= bottom_weights[k][config[r]] * record_prob(k, config[r], record_bits[r]);
            }
            total += prod;
            std::size_t r = 0;
            while (r < R && ++config[r] == L) {
                config[r] = 0;
                ++r;
            }
            if (r == R) break;
        }
        weights[k] = top_weights[k] * total;
    }
    const double norm = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (norm <= 0.0) throw degeneracy_error("enumeration weights all zero");
    for (auto& w : weights) w /= norm;
    return weights;
}

}  // namespace nlcmcr
