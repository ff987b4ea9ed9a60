#pragma once

#include <cstdint>

#include "nlcmcr/errors.hpp"

namespace nlcmcr {

// How the top-layer stick update counts occupancy.
//  - individuals: observed individuals per top class plus the augmented
//    unobserved counts (the default).
//  - groups: occupied groups per top class, augmented counts excluded.
enum class TopOccupancy { individuals, groups };

struct McmcConfig {
    int k_star = 10;
    int l_star = 10;  // uniform across top classes
    int iterations = 10000;  // kept iterations
    int burn_in = 5000;
    int thinning = 1;
    int chains = 4;
    double a0 = 0.25;
    double b0 = 0.25;
    double ak = 0.25;
    double bk = 0.25;
    std::uint64_t seed = 0;
    TopOccupancy occupancy = TopOccupancy::individuals;

    // k_star/l_star of 1 are allowed and collapse the corresponding layer
    // to a single fixed class (no stick update for that layer).
    void validate() const {
        if (k_star < 1 || l_star < 1) throw parameter_error("truncations must be at least 1");
        if (iterations <= 0) throw parameter_error("iterations must be positive");
        if (burn_in < 0) throw parameter_error("burn-in must be nonnegative");
        if (thinning < 1) throw parameter_error("thinning must be at least 1");
        if (chains < 1) throw parameter_error("chain count must be at least 1");
        if (!(a0 > 0.0) || !(b0 > 0.0) || !(ak > 0.0) || !(bk > 0.0)) {
            throw parameter_error("hyperpriors must be positive");
        }
    }
};

}  // namespace nlcmcr
