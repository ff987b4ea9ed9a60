#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nlcmcr {

// Monitored draws from one chain: one row per kept iteration, columns
// named in `names`. The metadata is enough to re-interpret the columns
// (model kind, truncations, list count) and to reproduce the run.
struct ChainOutput {
    std::string model;  // "lcmcr" or "nlcmcr"
    int chain_id = 0;
    std::uint64_t seed = 0;
    int K = 0;
    int L = 0;  // 0 for lcmcr
    int S = 0;
    long long n = 0;
    std::string config_echo;
    std::vector<std::string> names;
    std::vector<std::vector<double>> draws;

    std::size_t column(const std::string& name) const;  // throws on unknown name
    std::vector<double> series(const std::string& name) const;
};

}  // namespace nlcmcr
