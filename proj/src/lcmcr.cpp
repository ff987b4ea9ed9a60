#include "nlcmcr/lcmcr.hpp"

#include <cmath>
#include <numeric>

#include "fit_driver.hpp"
#include "nlcmcr/distributions.hpp"
#include "nlcmcr/errors.hpp"

namespace nlcmcr {

namespace {

double log_clamped(double p) { return std::log(p < kProbFloor ? kProbFloor : p); }

}  // namespace

void FlatModelState::check_invariants(const GroupPatterns& data) const {
    long long w_sum = 0;
    for (long long v : w) {
        if (v < 0) throw parameter_error("negative augmented count");
        w_sum += v;
    }
    if (N != n + w_sum) throw parameter_error("population identity N = n + sum(w) violated");
    if (static_cast<int>(z_counts.size()) != data.cells()) {
        throw parameter_error("assignment table shape mismatch");
    }
    for (int c = 0; c < data.cells(); ++c) {
        const auto& row = z_counts[static_cast<std::size_t>(c)];
        long long total = 0;
        for (long long v : row) {
            if (v < 0) throw parameter_error("negative assignment count");
            total += v;
        }
        if (total != data.count[static_cast<std::size_t>(c)]) {
            throw parameter_error("assignment counts do not match pattern counts");
        }
    }
    for (double v : lambda) {
        if (!(v > 0.0) || !(v < 1.0)) throw parameter_error("capture probability outside (0,1)");
    }
    if (K >= 2) sticks.validate();
}

FlatSampler::FlatSampler(const PatternData& data, const McmcConfig& config)
    : S_(data.S), config_(config) {
    config_.validate();
    data_ = data.J() == 1 ? data.groups[0] : data.pooled().groups[0];
    if (data_.n <= 0) throw validation_error("dataset must be nonempty");
}

FlatModelState FlatSampler::init_state(RngState& rng) const {
    FlatModelState st;
    st.K = config_.k_star;
    st.S = S_;
    st.n = data_.n;
    st.N = data_.n;
    st.w.assign(static_cast<std::size_t>(st.K), 0);
    st.lambda.resize(static_cast<std::size_t>(st.K * S_));
    for (auto& v : st.lambda) v = sample_beta(1.0, 1.0, rng);

    const double alpha = config_.a0 / config_.b0;
    st.sticks.alpha = alpha;
    st.sticks.truncation = st.K;
    if (st.K >= 2) {
        st.sticks.sticks.resize(static_cast<std::size_t>(st.K));
        for (int k = 0; k < st.K - 1; ++k) {
            st.sticks.sticks[static_cast<std::size_t>(k)] = sample_beta(1.0, alpha, rng);
        }
        st.sticks.sticks.back() = 1.0;
        st.sticks.weights = weights_from_sticks(st.sticks.sticks);
        st.sticks.log_tail = 0.0;
        for (int k = 0; k < st.K - 1; ++k) {
            st.sticks.log_tail += std::log1p(-st.sticks.sticks[static_cast<std::size_t>(k)]);
        }
    } else {
        st.sticks.sticks = {1.0};
        st.sticks.weights = {1.0};
    }

    // Uniform class assignment.
    std::vector<double> uniform(static_cast<std::size_t>(st.K),
                                1.0 / static_cast<double>(st.K));
    st.z_counts.resize(static_cast<std::size_t>(data_.cells()));
    for (int c = 0; c < data_.cells(); ++c) {
        st.z_counts[static_cast<std::size_t>(c)] =
            sample_multinomial(data_.count[static_cast<std::size_t>(c)], uniform, rng);
    }
    return st;
}

std::vector<double> FlatSampler::class_log_weights(const FlatModelState& state,
                                                   std::uint32_t pattern_bits) const {
    std::vector<double> lw(static_cast<std::size_t>(state.K));
    for (int k = 0; k < state.K; ++k) {
        double v = log_clamped(state.sticks.weights[static_cast<std::size_t>(k)]);
        for (int s = 0; s < state.S; ++s) {
            const double lam = state.lam(k, s);
            v += (pattern_bits >> s) & 1u ? log_clamped(lam) : log_clamped(1.0 - lam);
        }
        lw[static_cast<std::size_t>(k)] = v;
    }
    return lw;
}

void FlatSampler::update_assignments(FlatModelState& state, RngState& rng) const {
    for (int c = 0; c < data_.cells(); ++c) {
        const long long count = data_.count[static_cast<std::size_t>(c)];
        if (state.K == 1) {
            state.z_counts[static_cast<std::size_t>(c)] = {count};
            continue;
        }
        const auto lw = class_log_weights(state, data_.pattern[static_cast<std::size_t>(c)]);
        const double m = *std::max_element(lw.begin(), lw.end());
        std::vector<double> probs(lw.size());
        double total = 0.0;
        for (std::size_t k = 0; k < lw.size(); ++k) {
            probs[k] = std::exp(lw[k] - m);
            total += probs[k];
        }
        for (auto& p : probs) p /= total;
        state.z_counts[static_cast<std::size_t>(c)] = sample_multinomial(count, probs, rng);
    }
}

void FlatSampler::update_capture_probs(FlatModelState& state, RngState& rng) const {
    const int K = state.K;
    std::vector<long long> captured(static_cast<std::size_t>(K * S_), 0);
    std::vector<long long> class_total(static_cast<std::size_t>(K), 0);
    for (int c = 0; c < data_.cells(); ++c) {
        const std::uint32_t bits = data_.pattern[static_cast<std::size_t>(c)];
        for (int k = 0; k < K; ++k) {
            const long long cnt = state.z_counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
            if (cnt == 0) continue;
            class_total[static_cast<std::size_t>(k)] += cnt;
            for (int s = 0; s < S_; ++s) {
                if ((bits >> s) & 1u) captured[static_cast<std::size_t>(k * S_ + s)] += cnt;
            }
        }
    }
    for (int k = 0; k < K; ++k) {
        for (int s = 0; s < S_; ++s) {
            const long long cap = captured[static_cast<std::size_t>(k * S_ + s)];
            const long long uncap = class_total[static_cast<std::size_t>(k)] - cap;
            state.lambda[static_cast<std::size_t>(k * S_ + s)] = sample_beta(
                1.0 + static_cast<double>(cap),
                1.0 + static_cast<double>(uncap + state.w[static_cast<std::size_t>(k)]), rng);
        }
    }
}

void FlatSampler::update_weights_and_concentration(FlatModelState& state, RngState& rng) const {
    if (state.K == 1) {
        state.sticks.alpha = sample_gamma(config_.a0, config_.b0, rng);
        return;
    }
    std::vector<long long> occupancy(static_cast<std::size_t>(state.K), 0);
    for (int c = 0; c < data_.cells(); ++c) {
        for (int k = 0; k < state.K; ++k) {
            occupancy[static_cast<std::size_t>(k)] +=
                state.z_counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
        }
    }
    for (int k = 0; k < state.K; ++k) {
        occupancy[static_cast<std::size_t>(k)] += state.w[static_cast<std::size_t>(k)];
    }
    const double alpha = state.sticks.alpha;
    state.sticks = update_sticks(occupancy, alpha, rng);
    state.sticks.alpha =
        update_concentration_log(config_.a0, config_.b0, state.K, state.sticks.log_tail, rng);
}

void FlatSampler::update_missing_and_N(FlatModelState& state, RngState& rng) const {
    std::vector<double> rho(static_cast<std::size_t>(state.K));
    double rho0 = 0.0;
    for (int k = 0; k < state.K; ++k) {
        double miss = state.sticks.weights[static_cast<std::size_t>(k)];
        for (int s = 0; s < state.S; ++s) miss *= 1.0 - state.lam(k, s);
        rho[static_cast<std::size_t>(k)] = miss;
        rho0 += miss;
    }
    if (rho0 >= 1.0 - 1e-12) {
        throw degeneracy_error("total miss probability reached 1");
    }
    if (rho0 < kProbFloor || 1.0 - rho0 >= 1.0) {
        state.w.assign(static_cast<std::size_t>(state.K), 0);
        state.N = state.n;
        return;
    }
    const long long n0 =
        sample_negative_binomial(static_cast<double>(state.n), 1.0 - rho0, rng);
    for (auto& r : rho) r /= rho0;
    state.w = sample_multinomial(n0, rho, rng);
    state.N = state.n + n0;
}

void FlatSampler::lcmcr_sweep(FlatModelState& state, RngState& rng) const {
    update_assignments(state, rng);
    update_capture_probs(state, rng);
    update_weights_and_concentration(state, rng);
    update_missing_and_N(state, rng);
#ifndef NDEBUG
    state.check_invariants(data_);
#endif
}

std::vector<std::string> FlatSampler::monitor_names() const {
    std::vector<std::string> names{"N", "alpha"};
    const int K = config_.k_star;
    for (int k = 1; k <= K; ++k) names.push_back("pi_" + std::to_string(k));
    for (int k = 1; k <= K; ++k) names.push_back("nk_" + std::to_string(k));
    names.push_back("occ");
    for (int k = 1; k <= K; ++k) {
        for (int s = 1; s <= S_; ++s) {
            names.push_back("lambda_" + std::to_string(k) + "_" + std::to_string(s));
        }
    }
    return names;
}

std::vector<double> FlatSampler::monitor_row(const FlatModelState& state) const {
    std::vector<double> row;
    row.reserve(2 + static_cast<std::size_t>(2 * state.K + 1 + state.K * state.S));
    row.push_back(static_cast<double>(state.N));
    row.push_back(state.sticks.alpha);
    for (int k = 0; k < state.K; ++k) {
        row.push_back(state.sticks.weights[static_cast<std::size_t>(k)]);
    }
    std::vector<long long> nk(static_cast<std::size_t>(state.K), 0);
    for (int c = 0; c < data_.cells(); ++c) {
        for (int k = 0; k < state.K; ++k) {
            nk[static_cast<std::size_t>(k)] +=
                state.z_counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
        }
    }
    int occ = 0;
    for (int k = 0; k < state.K; ++k) {
        if (nk[static_cast<std::size_t>(k)] + state.w[static_cast<std::size_t>(k)] > 0) ++occ;
    }
    for (int k = 0; k < state.K; ++k) {
        row.push_back(static_cast<double>(nk[static_cast<std::size_t>(k)]));
    }
    row.push_back(static_cast<double>(occ));
    for (int k = 0; k < state.K; ++k) {
        for (int s = 0; s < state.S; ++s) row.push_back(state.lam(k, s));
    }
    return row;
}

std::vector<ChainOutput> fit_lcmcr(const PatternData& data, const McmcConfig& config) {
    FlatSampler sampler(data, config);
    return detail::run_chains(
        sampler, config, "lcmcr", sampler.data().n, config.k_star, 0, data.S,
        [&sampler](FlatModelState& st, RngState& rng) { sampler.lcmcr_sweep(st, rng); });
}

std::vector<ChainOutput> fit_lcmcr(const GroupedDataset& data, const McmcConfig& config) {
    data.validate();
    return fit_lcmcr(PatternData::from_dataset(data), config);
}

std::vector<ChainOutput> fit_lcmcr(const PatternCountTable& data, const McmcConfig& config) {
    data.validate();
    return fit_lcmcr(PatternData::from_table(data), config);
}

}  // namespace nlcmcr
