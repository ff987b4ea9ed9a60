#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nlcmcr/chain.hpp"
#include "nlcmcr/config.hpp"
#include "nlcmcr/pattern_data.hpp"
#include "nlcmcr/rng.hpp"
#include "nlcmcr/stickbreaking.hpp"

namespace nlcmcr {

// One-layer latent class sampler state. Records sharing a capture pattern
// are exchangeable, so class assignments are stored as per-pattern counts
// (z_counts[cell][k]) rather than one label per record; the two carry the
// same information for every update and every monitored quantity.
struct FlatModelState {
    int K = 0;
    int S = 0;
    long long n = 0;
    std::vector<std::vector<long long>> z_counts;  // [pattern cell][class]
    std::vector<double> lambda;                    // K x S, row-major
    StickSet sticks;
    std::vector<long long> w;  // unobserved count per class
    long long N = 0;

    double lam(int k, int s) const { return lambda[static_cast<std::size_t>(k * S + s)]; }
    // Throws parameter_error if any state invariant fails.
    void check_invariants(const GroupPatterns& data) const;
};

class FlatSampler {
  public:
    // Data is pooled across groups before construction.
    FlatSampler(const PatternData& data, const McmcConfig& config);

    FlatModelState init_state(RngState& rng) const;
    void lcmcr_sweep(FlatModelState& state, RngState& rng) const;

    // Categorical log-weights over classes for one capture pattern.
    std::vector<double> class_log_weights(const FlatModelState& state,
                                          std::uint32_t pattern_bits) const;

    void update_assignments(FlatModelState& state, RngState& rng) const;
    void update_capture_probs(FlatModelState& state, RngState& rng) const;
    void update_weights_and_concentration(FlatModelState& state, RngState& rng) const;
    void update_missing_and_N(FlatModelState& state, RngState& rng) const;

    const GroupPatterns& data() const { return data_; }
    const McmcConfig& config() const { return config_; }

    std::vector<std::string> monitor_names() const;
    std::vector<double> monitor_row(const FlatModelState& state) const;

  private:
    GroupPatterns data_;
    int S_;
    McmcConfig config_;
};

std::vector<ChainOutput> fit_lcmcr(const PatternData& data, const McmcConfig& config);
std::vector<ChainOutput> fit_lcmcr(const GroupedDataset& data, const McmcConfig& config);
std::vector<ChainOutput> fit_lcmcr(const PatternCountTable& data, const McmcConfig& config);

}  // namespace nlcmcr
