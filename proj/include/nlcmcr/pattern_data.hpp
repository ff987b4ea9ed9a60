#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlcmcr/data.hpp"

namespace nlcmcr {

// Distinct capture patterns and their multiplicities within one group.
// Records within a group sharing a pattern are exchangeable under both
// samplers, so all updates work on these counts.
struct GroupPatterns {
    std::string key;
    std::vector<std::uint32_t> pattern;  // distinct pattern bits
    std::vector<long long> count;        // parallel to `pattern`
    long long n = 0;

    int cells() const { return static_cast<int>(pattern.size()); }
};

// Sampler-facing view of a dataset. Unlike GroupedDataset this form may
// hold empty groups or all-zero patterns; the simulator test harnesses
// rely on that.
struct PatternData {
    int S = 0;
    long long n = 0;
    std::vector<GroupPatterns> groups;

    int J() const { return static_cast<int>(groups.size()); }

    static PatternData from_dataset(const GroupedDataset& ds);
    static PatternData from_table(const PatternCountTable& table);

    // All groups merged into one (the one-layer sampler's view).
    PatternData pooled() const;
};

}  // namespace nlcmcr
