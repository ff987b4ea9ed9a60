#pragma once

#include <string>
#include <variant>
#include <vector>

#include "nlcmcr/data.hpp"
#include "nlcmcr/rng.hpp"

namespace nlcmcr {

// Group sizes are either given explicitly (must sum to N) or drawn from
// 1 + round(lognormal(mu, sigma)), rescaled to sum to N with a floor of 2.
struct GroupSizeRule {
    double mu = 4.179;
    double sigma = 0.3;
};

struct SimulationConfig {
    int S = 0;
    int J = 0;
    long long N = 0;
    std::variant<std::vector<long long>, GroupSizeRule> group_sizes = GroupSizeRule{};
    std::vector<double> top_props;                         // length K
    std::vector<std::vector<double>> bottom_props;         // [k][l]
    std::vector<std::vector<std::vector<double>>> capture_probs;  // [k][l][s]

    void validate() const;
};

// Ground truth emitted next to each simulated dataset so fits can be
// scored without the sampler ever seeing it.
struct SimulationTruth {
    long long N = 0;
    long long n_observed = 0;
    long long n_unobserved = 0;
    std::vector<long long> group_sizes;             // per group, before drops
    std::vector<int> top_class;                     // true top class per group
    std::vector<std::vector<long long>> cell_counts;  // [k][l], observed + unobserved
    std::vector<std::string> dropped_groups;        // groups with no observed record
};

struct SimulationResult {
    GroupedDataset dataset;
    SimulationTruth truth;
};

SimulationResult simulate_two_layer(const SimulationConfig& cfg, RngState& rng);

// Single top class; cfg.top_props must be {1.0}.
SimulationResult simulate_one_layer(const SimulationConfig& cfg, RngState& rng);

// The simulation-study truth: S=4, J=100, N=10000, top classes (0.4, 0.6),
// bottom classes (0.8, 0.2) and (0.6, 0.4), and the four capture rows.
SimulationConfig paper_sim_config();

void write_truth(std::ostream& out, const SimulationTruth& truth);

}  // namespace nlcmcr
