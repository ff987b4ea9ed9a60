#pragma once

#include <cstdint>
#include <vector>

#include "nlcmcr/chain.hpp"
#include "nlcmcr/config.hpp"
#include "nlcmcr/pattern_data.hpp"
#include "nlcmcr/rng.hpp"
#include "nlcmcr/stickbreaking.hpp"

namespace nlcmcr {

// Two-layer sampler state. As in FlatModelState, bottom-layer assignments
// are kept as counts per (group, pattern cell, bottom class); top-layer
// assignments are one class per group.
struct NestedModelState {
    int K = 0;
    int L = 0;
    int S = 0;
    long long n = 0;
    std::vector<int> z2;                                         // per group
    std::vector<std::vector<std::vector<long long>>> z1_counts;  // [group][cell][l]
    std::vector<double> lambda;                                  // K x L x S
    StickSet top_sticks;
    std::vector<StickSet> bottom_sticks;  // one per top class
    std::vector<long long> w;             // K x L, row-major
    long long N = 0;

    double lam(int k, int l, int s) const {
        return lambda[static_cast<std::size_t>((k * L + l) * S + s)];
    }
    long long w_at(int k, int l) const { return w[static_cast<std::size_t>(k * L + l)]; }
    long long w_total() const;

    void check_invariants(const PatternData& data) const;
};

class NestedSampler {
  public:
    NestedSampler(const PatternData& data, const McmcConfig& config);

    NestedModelState init_state(RngState& rng) const;
    void nlcmcr_sweep(NestedModelState& state, RngState& rng) const;

    void update_top_assignments(NestedModelState& state, RngState& rng) const;
    void update_bottom_assignments(NestedModelState& state, RngState& rng) const;
    void update_capture_probs(NestedModelState& state, RngState& rng) const;
    void update_weights_and_concentrations(NestedModelState& state, RngState& rng) const;
    void update_missing_and_N(NestedModelState& state, RngState& rng) const;

    // Categorical log-weights over top classes for one group (product over
    // the group's records of per-record sums over bottom classes).
    std::vector<double> top_class_log_weights(const NestedModelState& state, int group) const;
    // Log-weights over bottom classes for one pattern under top class k.
    std::vector<double> bottom_class_log_weights(const NestedModelState& state, int k,
                                                 std::uint32_t pattern_bits) const;

    const PatternData& data() const { return data_; }
    const McmcConfig& config() const { return config_; }

    std::vector<std::string> monitor_names() const;
    std::vector<double> monitor_row(const NestedModelState& state) const;

  private:
    // Per-class-pair log-likelihood table over the distinct patterns in the
    // data; rebuilt from the current lambda.
    std::vector<double> pattern_loglik(const NestedModelState& state) const;

    PatternData data_;
    McmcConfig config_;
    std::vector<std::uint32_t> distinct_;       // sorted distinct pattern bits
    std::vector<std::vector<int>> cell_index_;  // [group][cell] -> index into distinct_
};

std::vector<ChainOutput> fit_nlcmcr(const GroupedDataset& data, const McmcConfig& config);
std::vector<ChainOutput> fit_nlcmcr(const PatternData& data, const McmcConfig& config);

}  // namespace nlcmcr
