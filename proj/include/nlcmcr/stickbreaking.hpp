#pragma once

#include <span>
#include <vector>

#include "nlcmcr/rng.hpp"

namespace nlcmcr {

// Truncated stick-breaking weights. The last stick is pinned at 1 so the
// weights form an exact simplex of length `truncation`.
struct StickSet {
    std::vector<double> sticks;   // U_1..U_{K*}, U_{K*} = 1
    std::vector<double> weights;  // pi_1..pi_{K*}
    // log pi_{K*}, tracked separately because the tail weight underflows
    // double precision long before log pi_{K*} stops mattering to the
    // concentration update.
    double log_tail = 0.0;
    double alpha = 1.0;
    int truncation = 2;

    // Throws if the stored sticks/weights violate the truncation contract.
    void validate() const;
};

// pi_k = U_k * prod_{h<k}(1 - U_h). Requires entries in (0,1], last = 1,
// and at least two sticks.
std::vector<double> weights_from_sticks(std::span<const double> sticks);

// Conjugate refresh: U_k ~ Beta(1 + u_k, alpha + sum_{h>k} u_h).
StickSet update_sticks(std::span<const long long> occupancy, double alpha, RngState& rng);

// alpha ~ Gamma(a - 1 + K*, b - log(tail_weight)), shape-rate. The tail
// weight is clamped away from 0 and 1 rather than rejected.
double update_concentration(double a, double b, int truncation, double tail_weight,
                            RngState& rng);

// Same draw parameterized by log(tail_weight) directly; use with
// StickSet::log_tail to avoid the underflow floor of the linear form.
double update_concentration_log(double a, double b, int truncation, double log_tail_weight,
                                RngState& rng);

}  // namespace nlcmcr
