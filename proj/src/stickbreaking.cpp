#include "nlcmcr/stickbreaking.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "nlcmcr/distributions.hpp"
#include "nlcmcr/errors.hpp"

namespace nlcmcr {

void StickSet::validate() const {
    if (truncation < 2) throw parameter_error("stick set truncation must be at least 2");
    if (static_cast<int>(sticks.size()) != truncation ||
        static_cast<int>(weights.size()) != truncation) {
        throw parameter_error("stick set size differs from truncation");
    }
    if (!(alpha > 0.0)) throw parameter_error("stick set concentration must be positive");
    const auto recomputed = weights_from_sticks(sticks);
    double sum = 0.0;
    for (int k = 0; k < truncation; ++k) {
        if (std::fabs(recomputed[static_cast<std::size_t>(k)] -
                      weights[static_cast<std::size_t>(k)]) > 1e-12) {
            throw parameter_error("stick weights inconsistent with sticks");
        }
        sum += weights[static_cast<std::size_t>(k)];
    }
    if (std::fabs(sum - 1.0) > 1e-12) throw parameter_error("stick weights do not sum to 1");
}

std::vector<double> weights_from_sticks(std::span<const double> sticks) {
    if (sticks.size() < 2) throw parameter_error("truncation must be at least 2");
    if (sticks.back() != 1.0) {
        throw parameter_error("truncation contract: last stick must equal 1");
    }
    std::vector<double> weights(sticks.size());
    double remaining = 1.0;
    for (std::size_t k = 0; k < sticks.size(); ++k) {
        const double u = sticks[k];
        if (!(u > 0.0) || u > 1.0) throw parameter_error("sticks must lie in (0,1]");
        weights[k] = u * remaining;
        remaining *= 1.0 - u;
    }
    return weights;
}

StickSet update_sticks(std::span<const long long> occupancy, double alpha, RngState& rng) {
    if (!(alpha > 0.0)) throw parameter_error("update_sticks: alpha must be positive");
    const int K = static_cast<int>(occupancy.size());
    if (K < 2) throw parameter_error("update_sticks: truncation must be at least 2");
    long long tail = 0;
    for (long long u : occupancy) {
        if (u < 0) throw parameter_error("update_sticks: negative occupancy");
        tail += u;
    }
    StickSet out;
    out.alpha = alpha;
    out.truncation = K;
    out.sticks.resize(static_cast<std::size_t>(K));
    // Draw each stick from its gamma pair so log(1 - U_k) can be accumulated
    // at full precision even when U_k rounds to 1 in double.
    double log_tail_weight = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int k = 0; k < K - 1; ++k) {
        tail -= occupancy[static_cast<std::size_t>(k)];
        const double x = sample_gamma(
            1.0 + static_cast<double>(occupancy[static_cast<std::size_t>(k)]), 1.0, rng);
        const double y = sample_gamma(alpha + static_cast<double>(tail), 1.0, rng);
        double u = x / (x + y);
        if (u < kProbFloor) u = kProbFloor;
        if (u > 1.0 - eps) u = 1.0 - eps;
        out.sticks[static_cast<std::size_t>(k)] = u;
        log_tail_weight += std::log(y) - std::log(x + y);
    }
    out.sticks.back() = 1.0;
    out.weights = weights_from_sticks(out.sticks);
    out.log_tail = log_tail_weight;
    return out;
}

double update_concentration(double a, double b, int truncation, double tail_weight,
                            RngState& rng) {
    double pi = tail_weight;
    if (pi < kProbFloor) pi = kProbFloor;
    if (pi > 1.0) pi = 1.0;
    return update_concentration_log(a, b, truncation, std::log(pi), rng);
}

double update_concentration_log(double a, double b, int truncation, double log_tail_weight,
                                RngState& rng) {
    if (log_tail_weight > 0.0) log_tail_weight = 0.0;
    const double shape = a - 1.0 + static_cast<double>(truncation);
    const double rate = b - log_tail_weight;
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw parameter_error("update_concentration: nonpositive shape or rate");
    }
    return sample_gamma(shape, rate, rng);
}

}  // namespace nlcmcr
