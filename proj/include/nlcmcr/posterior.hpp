#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nlcmcr/chain.hpp"

namespace nlcmcr {

struct QuantitySummary {
    std::string name;
    double mean = 0.0;
    double median = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double ess = 0.0;
    bool zero_variance = false;
};

struct PosteriorSummary {
    double level = 0.95;
    long long n = 0;
    std::string model;
    std::vector<QuantitySummary> quantities;

    const QuantitySummary& at(const std::string& name) const;
};

// Type-7 quantile (linear interpolation between order statistics).
double quantile_type7(std::vector<double> values, double q);

// Initial-positive-sequence autocorrelation estimator. A constant series
// reports ESS = length with the zero-variance flag set by callers.
double effective_sample_size(std::span<const double> series);

// Pools post-burn-in draws across chains (all chains must share a schema).
PosteriorSummary summarize(const std::vector<ChainOutput>& chains, double level = 0.95);

// Per-draw slot ordering by descending class weight, top layer first.
struct RelabeledCell {
    std::array<double, 3> pi1{};  // median, lower, upper
    std::vector<std::array<double, 3>> lambda;  // per list
    double mean_occupancy = 0.0;
};

struct RelabeledTopClass {
    std::array<double, 3> pi2{};
    // Fraction of observed groups assigned to the slot. Unlike pi2 this is
    // insensitive to how unevenly individuals spread across groups, so it is
    // the quantity to compare against a design's class split. Zero for
    // one-layer chains.
    std::array<double, 3> group_share{};
    double mean_occupancy = 0.0;
    std::vector<RelabeledCell> cells;
};

// Slots whose posterior mean occupancy is below one record are dropped.
// Works for both models; lcmcr chains yield one cell per top slot.
std::vector<RelabeledTopClass> relabel_classes(const std::vector<ChainOutput>& chains,
                                               double level = 0.95);

void write_chain_csv(std::ostream& out, const ChainOutput& chain);
ChainOutput read_chain_csv(std::istream& in);

void write_summary_table(std::ostream& out, const PosteriorSummary& summary);
void write_summary_keyvalue(std::ostream& out, const PosteriorSummary& summary);
void write_relabeled_table(std::ostream& out, const std::vector<RelabeledTopClass>& classes);

}  // namespace nlcmcr
