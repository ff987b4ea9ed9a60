#include "nlcmcr/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "nlcmcr/distributions.hpp"
#include "nlcmcr/errors.hpp"

namespace nlcmcr {

namespace {

void check_simplex(const std::vector<double>& p, const char* what) {
    if (p.empty()) throw parameter_error(std::string(what) + ": empty proportion vector");
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0) throw parameter_error(std::string(what) + ": negative proportion");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-12) {
        throw parameter_error(std::string(what) + ": proportions must sum to 1");
    }
}

std::vector<long long> draw_group_sizes(const SimulationConfig& cfg, RngState& rng) {
    if (const auto* sizes = std::get_if<std::vector<long long>>(&cfg.group_sizes)) {
        return *sizes;
    }
    const auto& rule = std::get<GroupSizeRule>(cfg.group_sizes);
    const long long floor_size = cfg.N >= 2ll * cfg.J ? 2 : 1;
    std::vector<double> raw(static_cast<std::size_t>(cfg.J));
    double total = 0.0;
    for (auto& v : raw) {
        v = 1.0 + std::round(std::exp(rule.mu + rule.sigma * rng.normal()));
        total += v;
    }
    std::vector<long long> sizes(static_cast<std::size_t>(cfg.J));
    long long sum = 0;
    for (std::size_t j = 0; j < raw.size(); ++j) {
        sizes[j] = std::max(floor_size, static_cast<long long>(std::llround(
                                            raw[j] * static_cast<double>(cfg.N) / total)));
        sum += sizes[j];
    }
    // Settle rounding drift on the largest groups so the floor never breaks.
    while (sum != cfg.N) {
        const auto it = std::max_element(sizes.begin(), sizes.end());
        if (sum > cfg.N) {
            if (*it <= floor_size) throw parameter_error("cannot fit group sizes to N");
            --*it;
            --sum;
        } else {
            ++*it;
            ++sum;
        }
    }
    return sizes;
}

std::string group_key(int j) {
    std::string num = std::to_string(j + 1);
    while (num.size() < 3) num.insert(num.begin(), '0');
    return "g" + num;
}

}  // namespace

void SimulationConfig::validate() const {
    if (S < 2 || S > 32) throw parameter_error("simulation needs 2..32 lists");
    if (J < 1) throw parameter_error("simulation needs at least one group");
    if (N < J) throw parameter_error("population smaller than group count");
    check_simplex(top_props, "top_props");
    const std::size_t K = top_props.size();
    if (bottom_props.size() != K || capture_probs.size() != K) {
        throw parameter_error("bottom_props/capture_probs must have one entry per top class");
    }
    for (std::size_t k = 0; k < K; ++k) {
        check_simplex(bottom_props[k], "bottom_props");
        if (capture_probs[k].size() != bottom_props[k].size()) {
            throw parameter_error("capture_probs rows must match bottom class count");
        }
        for (const auto& row : capture_probs[k]) {
            if (static_cast<int>(row.size()) != S) {
                throw parameter_error("capture_probs row length must equal S");
            }
            for (double p : row) {
                if (!(p > 0.0) || !(p < 1.0)) {
                    throw parameter_error("capture probabilities must lie in (0,1)");
                }
            }
        }
    }
    if (const auto* sizes = std::get_if<std::vector<long long>>(&group_sizes)) {
        if (static_cast<int>(sizes->size()) != J) {
            throw parameter_error("explicit group sizes must have length J");
        }
        long long sum = 0;
        for (long long v : *sizes) {
            if (v < 1) throw parameter_error("group sizes must be positive");
            sum += v;
        }
        if (sum != N) throw parameter_error("explicit group sizes must sum to N");
    }
}

SimulationResult simulate_two_layer(const SimulationConfig& cfg, RngState& rng) {
    cfg.validate();
    const int K = static_cast<int>(cfg.top_props.size());

    SimulationResult out;
    out.dataset.S = cfg.S;
    out.dataset.provenance = "simulated two-layer latent class data";
    out.truth.N = cfg.N;
    out.truth.group_sizes = draw_group_sizes(cfg, rng);
    out.truth.top_class.resize(static_cast<std::size_t>(cfg.J));
    out.truth.cell_counts.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        out.truth.cell_counts[static_cast<std::size_t>(k)].assign(cfg.bottom_props[static_cast<std::size_t>(k)].size(), 0);
    }

    for (int j = 0; j < cfg.J; ++j) {
        const int k = sample_categorical(cfg.top_props, rng);
        out.truth.top_class[static_cast<std::size_t>(j)] = k;
        RecordGroup group;
        group.key = group_key(j);
        const auto& bottom = cfg.bottom_props[static_cast<std::size_t>(k)];
        for (long long i = 0; i < out.truth.group_sizes[static_cast<std::size_t>(j)]; ++i) {
            const int l = sample_categorical(bottom, rng);
            ++out.truth.cell_counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
            std::uint32_t bits = 0;
            const auto& probs = cfg.capture_probs[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
            for (int s = 0; s < cfg.S; ++s) {
                if (rng.uniform() < probs[static_cast<std::size_t>(s)]) bits |= 1u << s;
            }
            if (bits != 0) {
                group.records.emplace_back(bits, cfg.S);
            } else {
                ++out.truth.n_unobserved;
            }
        }
        if (group.records.empty()) {
            out.truth.dropped_groups.push_back(group.key);
        } else {
            out.truth.n_observed += static_cast<long long>(group.records.size());
            out.dataset.groups.push_back(std::move(group));
        }
    }
    return out;
}

SimulationResult simulate_one_layer(const SimulationConfig& cfg, RngState& rng) {
    if (cfg.top_props.size() != 1) {
        throw parameter_error("simulate_one_layer requires a single top class");
    }
    return simulate_two_layer(cfg, rng);
}

SimulationConfig paper_sim_config() {
    SimulationConfig cfg;
    cfg.S = 4;
    cfg.J = 100;
    cfg.N = 10000;
    cfg.group_sizes = GroupSizeRule{};
    cfg.top_props = {0.4, 0.6};
    cfg.bottom_props = {{0.8, 0.2}, {0.6, 0.4}};
    cfg.capture_probs = {
        {{0.9, 0.8, 0.7, 0.6}, {0.01, 0.3, 0.1, 0.2}},
        {{0.1, 0.01, 0.2, 0.05}, {0.9, 0.02, 0.1, 0.01}},
    };
    return cfg;
}

void write_truth(std::ostream& out, const SimulationTruth& truth) {
    out << "# nlcmcr-truth v1\n";
    out << "N " << truth.N << "\n";
    out << "n_observed " << truth.n_observed << "\n";
    out << "n_unobserved " << truth.n_unobserved << "\n";
    out << "group_sizes";
    for (long long v : truth.group_sizes) out << " " << v;
    out << "\n";
    out << "top_class";
    for (int v : truth.top_class) out << " " << (v + 1);
    out << "\n";
    for (std::size_t k = 0; k < truth.cell_counts.size(); ++k) {
        out << "cell_counts_" << (k + 1);
        for (long long v : truth.cell_counts[k]) out << " " << v;
        out << "\n";
    }
    if (!truth.dropped_groups.empty()) {
        out << "dropped_groups";
        for (const auto& g : truth.dropped_groups) out << " " << g;
        out << "\n";
    }
}

}  // namespace nlcmcr
