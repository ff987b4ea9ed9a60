#include "nlcmcr/nlcmcr.hpp"

#include <algorithm>
#include <cmath>

#include "fit_driver.hpp"
#include "nlcmcr/distributions.hpp"
#include "nlcmcr/errors.hpp"

namespace nlcmcr {

namespace {

double log_clamped(double p) { return std::log(p < kProbFloor ? kProbFloor : p); }

StickSet prior_sticks(int truncation, double alpha, RngState& rng) {
    StickSet out;
    out.alpha = alpha;
    out.truncation = truncation;
    if (truncation >= 2) {
        out.sticks.resize(static_cast<std::size_t>(truncation));
        for (int k = 0; k < truncation - 1; ++k) {
            out.sticks[static_cast<std::size_t>(k)] = sample_beta(1.0, alpha, rng);
        }
        out.sticks.back() = 1.0;
        out.weights = weights_from_sticks(out.sticks);
        out.log_tail = 0.0;
        for (int k = 0; k < truncation - 1; ++k) {
            out.log_tail += std::log1p(-out.sticks[static_cast<std::size_t>(k)]);
        }
    } else {
        out.sticks = {1.0};
        out.weights = {1.0};
    }
    return out;
}

}  // namespace

long long NestedModelState::w_total() const {
    long long total = 0;
    for (long long v : w) total += v;
    return total;
}

void NestedModelState::check_invariants(const PatternData& data) const {
    for (long long v : w) {
        if (v < 0) throw parameter_error("negative augmented count");
    }
    if (N != n + w_total()) throw parameter_error("population identity N = n + sum(w) violated");
    if (static_cast<int>(z2.size()) != data.J()) {
        throw parameter_error("top assignment length differs from group count");
    }
    for (int z : z2) {
        if (z < 0 || z >= K) throw parameter_error("top class index out of range");
    }
    if (static_cast<int>(z1_counts.size()) != data.J()) {
        throw parameter_error("bottom assignment table shape mismatch");
    }
    for (int g = 0; g < data.J(); ++g) {
        const auto& group = data.groups[static_cast<std::size_t>(g)];
        const auto& cells = z1_counts[static_cast<std::size_t>(g)];
        if (static_cast<int>(cells.size()) != group.cells()) {
            throw parameter_error("bottom assignment table shape mismatch");
        }
        for (int c = 0; c < group.cells(); ++c) {
            long long total = 0;
            for (long long v : cells[static_cast<std::size_t>(c)]) {
                if (v < 0) throw parameter_error("negative assignment count");
                total += v;
            }
            if (total != group.count[static_cast<std::size_t>(c)]) {
                throw parameter_error("assignment counts do not match pattern counts");
            }
        }
    }
    for (double v : lambda) {
        if (!(v > 0.0) || !(v < 1.0)) throw parameter_error("capture probability outside (0,1)");
    }
    if (K >= 2) top_sticks.validate();
    for (const auto& bs : bottom_sticks) {
        if (L >= 2) bs.validate();
    }
}

NestedSampler::NestedSampler(const PatternData& data, const McmcConfig& config)
    : data_(data), config_(config) {
    config_.validate();
    if (data_.S < 2) throw validation_error("dataset must declare at least two lists");
    if (data_.groups.empty()) throw validation_error("dataset must contain at least one group");

    for (const auto& g : data_.groups) {
        for (std::uint32_t bits : g.pattern) distinct_.push_back(bits);
    }
    std::sort(distinct_.begin(), distinct_.end());
    distinct_.erase(std::unique(distinct_.begin(), distinct_.end()), distinct_.end());
    cell_index_.resize(data_.groups.size());
    for (std::size_t g = 0; g < data_.groups.size(); ++g) {
        const auto& group = data_.groups[g];
        cell_index_[g].resize(group.pattern.size());
        for (std::size_t c = 0; c < group.pattern.size(); ++c) {
            cell_index_[g][c] = static_cast<int>(
                std::lower_bound(distinct_.begin(), distinct_.end(), group.pattern[c]) -
                distinct_.begin());
        }
    }
}

NestedModelState NestedSampler::init_state(RngState& rng) const {
    NestedModelState st;
    st.K = config_.k_star;
    st.L = config_.l_star;
    st.S = data_.S;
    st.n = data_.n;
    st.N = data_.n;
    st.w.assign(static_cast<std::size_t>(st.K * st.L), 0);
    st.lambda.resize(static_cast<std::size_t>(st.K * st.L * st.S));
    for (auto& v : st.lambda) v = sample_beta(1.0, 1.0, rng);

    st.top_sticks = prior_sticks(st.K, config_.a0 / config_.b0, rng);
    st.bottom_sticks.reserve(static_cast<std::size_t>(st.K));
    for (int k = 0; k < st.K; ++k) {
        st.bottom_sticks.push_back(prior_sticks(st.L, config_.ak / config_.bk, rng));
    }

    st.z2.resize(data_.groups.size());
    std::vector<double> top_uniform(static_cast<std::size_t>(st.K),
                                    1.0 / static_cast<double>(st.K));
    std::vector<double> bottom_uniform(static_cast<std::size_t>(st.L),
                                       1.0 / static_cast<double>(st.L));
    st.z1_counts.resize(data_.groups.size());
    for (std::size_t g = 0; g < data_.groups.size(); ++g) {
        st.z2[g] = sample_categorical(top_uniform, rng);
        const auto& group = data_.groups[g];
        st.z1_counts[g].resize(group.pattern.size());
        for (std::size_t c = 0; c < group.pattern.size(); ++c) {
            st.z1_counts[g][c] = sample_multinomial(group.count[c], bottom_uniform, rng);
        }
    }
    return st;
}

std::vector<double> NestedSampler::pattern_loglik(const NestedModelState& state) const {
    // loglik[(k*L + l)*D + d] for the distinct patterns in the data.
    const int D = static_cast<int>(distinct_.size());
    std::vector<double> table(static_cast<std::size_t>(state.K * state.L * D));
    for (int k = 0; k < state.K; ++k) {
        for (int l = 0; l < state.L; ++l) {
            for (int d = 0; d < D; ++d) {
                const std::uint32_t bits = distinct_[static_cast<std::size_t>(d)];
                double v = 0.0;
                for (int s = 0; s < state.S; ++s) {
                    const double lam = state.lam(k, l, s);
                    v += (bits >> s) & 1u ? log_clamped(lam) : log_clamped(1.0 - lam);
                }
                table[static_cast<std::size_t>((k * state.L + l) * D + d)] = v;
            }
        }
    }
    return table;
}

std::vector<double> NestedSampler::bottom_class_log_weights(const NestedModelState& state,
                                                            int k,
                                                            std::uint32_t pattern_bits) const {
    std::vector<double> lw(static_cast<std::size_t>(state.L));
    for (int l = 0; l < state.L; ++l) {
        double v = log_clamped(
            state.bottom_sticks[static_cast<std::size_t>(k)].weights[static_cast<std::size_t>(l)]);
        for (int s = 0; s < state.S; ++s) {
            const double lam = state.lam(k, l, s);
            v += (pattern_bits >> s) & 1u ? log_clamped(lam) : log_clamped(1.0 - lam);
        }
        lw[static_cast<std::size_t>(l)] = v;
    }
    return lw;
}

std::vector<double> NestedSampler::top_class_log_weights(const NestedModelState& state,
                                                         int group) const {
    // One record contributes log sum_l pi1_{k,l} * lik(k, l, pattern); the
    // group's weight is the product over its records.
    const auto& gp = data_.groups[static_cast<std::size_t>(group)];
    std::vector<double> lw(static_cast<std::size_t>(state.K));
    std::vector<double> per_l(static_cast<std::size_t>(state.L));
    for (int k = 0; k < state.K; ++k) {
        double v = log_clamped(state.top_sticks.weights[static_cast<std::size_t>(k)]);
        for (int c = 0; c < gp.cells(); ++c) {
            const auto rec = bottom_class_log_weights(state, k, gp.pattern[static_cast<std::size_t>(c)]);
            std::copy(rec.begin(), rec.end(), per_l.begin());
            v += static_cast<double>(gp.count[static_cast<std::size_t>(c)]) *
                 log_sum_exp(per_l);
        }
        lw[static_cast<std::size_t>(k)] = v;
    }
    return lw;
}

void NestedSampler::update_top_assignments(NestedModelState& state, RngState& rng) const {
    if (state.K == 1) {
        std::fill(state.z2.begin(), state.z2.end(), 0);
        return;
    }
    const int D = static_cast<int>(distinct_.size());
    const auto lik = pattern_loglik(state);
    // m[k*D + d] = log sum_l pi1_{k,l} lik(k,l,d)
    std::vector<double> m(static_cast<std::size_t>(state.K * D));
    std::vector<double> buf(static_cast<std::size_t>(state.L));
    for (int k = 0; k < state.K; ++k) {
        const auto& pi1 = state.bottom_sticks[static_cast<std::size_t>(k)].weights;
        for (int d = 0; d < D; ++d) {
            for (int l = 0; l < state.L; ++l) {
                buf[static_cast<std::size_t>(l)] =
                    log_clamped(pi1[static_cast<std::size_t>(l)]) +
                    lik[static_cast<std::size_t>((k * state.L + l) * D + d)];
            }
            m[static_cast<std::size_t>(k * D + d)] = log_sum_exp(buf);
        }
    }
    std::vector<double> lw(static_cast<std::size_t>(state.K));
    for (int g = 0; g < data_.J(); ++g) {
        const auto& gp = data_.groups[static_cast<std::size_t>(g)];
        for (int k = 0; k < state.K; ++k) {
            double v = log_clamped(state.top_sticks.weights[static_cast<std::size_t>(k)]);
            for (int c = 0; c < gp.cells(); ++c) {
                v += static_cast<double>(gp.count[static_cast<std::size_t>(c)]) *
                     m[static_cast<std::size_t>(k * D + cell_index_[static_cast<std::size_t>(g)]
                                                                  [static_cast<std::size_t>(c)])];
            }
            lw[static_cast<std::size_t>(k)] = v;
        }
        state.z2[static_cast<std::size_t>(g)] = sample_categorical_log(lw, rng);
    }
}

void NestedSampler::update_bottom_assignments(NestedModelState& state, RngState& rng) const {
    const int D = static_cast<int>(distinct_.size());
    const auto lik = pattern_loglik(state);
    std::vector<double> probs(static_cast<std::size_t>(state.L));
    for (int g = 0; g < data_.J(); ++g) {
        const auto& gp = data_.groups[static_cast<std::size_t>(g)];
        const int k = state.z2[static_cast<std::size_t>(g)];
        const auto& pi1 = state.bottom_sticks[static_cast<std::size_t>(k)].weights;
        for (int c = 0; c < gp.cells(); ++c) {
            const long long count = gp.count[static_cast<std::size_t>(c)];
            if (state.L == 1) {
                state.z1_counts[static_cast<std::size_t>(g)][static_cast<std::size_t>(c)] = {count};
                continue;
            }
            const int d =
                cell_index_[static_cast<std::size_t>(g)][static_cast<std::size_t>(c)];
            double maxv = -1e300;
            for (int l = 0; l < state.L; ++l) {
                const double v = log_clamped(pi1[static_cast<std::size_t>(l)]) +
                                 lik[static_cast<std::size_t>((k * state.L + l) * D + d)];
                probs[static_cast<std::size_t>(l)] = v;
                maxv = std::max(maxv, v);
            }
            double total = 0.0;
            for (int l = 0; l < state.L; ++l) {
                probs[static_cast<std::size_t>(l)] =
                    std::exp(probs[static_cast<std::size_t>(l)] - maxv);
                total += probs[static_cast<std::size_t>(l)];
            }
            for (auto& p : probs) p /= total;
            state.z1_counts[static_cast<std::size_t>(g)][static_cast<std::size_t>(c)] =
                sample_multinomial(count, probs, rng);
        }
    }
}

void NestedSampler::update_capture_probs(NestedModelState& state, RngState& rng) const {
    const int K = state.K;
    const int L = state.L;
    const int S = state.S;
    std::vector<long long> captured(static_cast<std::size_t>(K * L * S), 0);
    std::vector<long long> cell_total(static_cast<std::size_t>(K * L), 0);
    for (int g = 0; g < data_.J(); ++g) {
        const auto& gp = data_.groups[static_cast<std::size_t>(g)];
        const int k = state.z2[static_cast<std::size_t>(g)];
        for (int c = 0; c < gp.cells(); ++c) {
            const std::uint32_t bits = gp.pattern[static_cast<std::size_t>(c)];
            const auto& row =
                state.z1_counts[static_cast<std::size_t>(g)][static_cast<std::size_t>(c)];
            for (int l = 0; l < L; ++l) {
                const long long cnt = row[static_cast<std::size_t>(l)];
                if (cnt == 0) continue;
                cell_total[static_cast<std::size_t>(k * L + l)] += cnt;
                for (int s = 0; s < S; ++s) {
                    if ((bits >> s) & 1u) {
                        captured[static_cast<std::size_t>((k * L + l) * S + s)] += cnt;
                    }
                }
            }
        }
    }
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < L; ++l) {
            const long long w_kl = state.w_at(k, l);
            for (int s = 0; s < S; ++s) {
                const long long cap = captured[static_cast<std::size_t>((k * L + l) * S + s)];
                const long long uncap = cell_total[static_cast<std::size_t>(k * L + l)] - cap;
                state.lambda[static_cast<std::size_t>((k * L + l) * S + s)] = sample_beta(
                    1.0 + static_cast<double>(cap),
                    1.0 + static_cast<double>(uncap + w_kl), rng);
            }
        }
    }
}

void NestedSampler::update_weights_and_concentrations(NestedModelState& state,
                                                      RngState& rng) const {
    const int K = state.K;
    const int L = state.L;
    // Top layer.
    if (K >= 2) {
        std::vector<long long> occupancy(static_cast<std::size_t>(K), 0);
        if (config_.occupancy == TopOccupancy::individuals) {
            for (int g = 0; g < data_.J(); ++g) {
                occupancy[static_cast<std::size_t>(state.z2[static_cast<std::size_t>(g)])] +=
                    data_.groups[static_cast<std::size_t>(g)].n;
            }
            for (int k = 0; k < K; ++k) {
                for (int l = 0; l < L; ++l) {
                    occupancy[static_cast<std::size_t>(k)] += state.w_at(k, l);
                }
            }
        } else {
            for (int g = 0; g < data_.J(); ++g) {
                occupancy[static_cast<std::size_t>(state.z2[static_cast<std::size_t>(g)])] += 1;
            }
        }
        const double alpha = state.top_sticks.alpha;
        state.top_sticks = update_sticks(occupancy, alpha, rng);
        state.top_sticks.alpha = update_concentration_log(config_.a0, config_.b0, K,
                                                          state.top_sticks.log_tail, rng);
    } else {
        state.top_sticks.alpha = sample_gamma(config_.a0, config_.b0, rng);
    }

    // Bottom layer, per top class.
    std::vector<long long> n_kl(static_cast<std::size_t>(K * L), 0);
    for (int g = 0; g < data_.J(); ++g) {
        const auto& gp = data_.groups[static_cast<std::size_t>(g)];
        const int k = state.z2[static_cast<std::size_t>(g)];
        for (int c = 0; c < gp.cells(); ++c) {
            const auto& row =
                state.z1_counts[static_cast<std::size_t>(g)][static_cast<std::size_t>(c)];
            for (int l = 0; l < L; ++l) {
                n_kl[static_cast<std::size_t>(k * L + l)] += row[static_cast<std::size_t>(l)];
            }
        }
    }
    for (int k = 0; k < K; ++k) {
        auto& sticks = state.bottom_sticks[static_cast<std::size_t>(k)];
        if (L >= 2) {
            std::vector<long long> occupancy(static_cast<std::size_t>(L));
            for (int l = 0; l < L; ++l) {
                occupancy[static_cast<std::size_t>(l)] =
                    n_kl[static_cast<std::size_t>(k * L + l)] + state.w_at(k, l);
            }
            const double alpha = sticks.alpha;
            sticks = update_sticks(occupancy, alpha, rng);
            sticks.alpha = update_concentration_log(config_.ak, config_.bk, L,
                                                    sticks.log_tail, rng);
        } else {
            sticks.alpha = sample_gamma(config_.ak, config_.bk, rng);
        }
    }
}

void NestedSampler::update_missing_and_N(NestedModelState& state, RngState& rng) const {
    const int K = state.K;
    const int L = state.L;
    std::vector<double> rho(static_cast<std::size_t>(K * L));
    double rho0 = 0.0;
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < L; ++l) {
            double miss =
                state.top_sticks.weights[static_cast<std::size_t>(k)] *
                state.bottom_sticks[static_cast<std::size_t>(k)].weights[static_cast<std::size_t>(l)];
            for (int s = 0; s < state.S; ++s) miss *= 1.0 - state.lam(k, l, s);
            rho[static_cast<std::size_t>(k * L + l)] = miss;
            rho0 += miss;
        }
    }
    if (rho0 >= 1.0 - 1e-12) {
        throw degeneracy_error("total miss probability reached 1");
    }
    if (rho0 < kProbFloor || 1.0 - rho0 >= 1.0) {
        std::fill(state.w.begin(), state.w.end(), 0);
        state.N = state.n;
        return;
    }
    const long long n0 =
        sample_negative_binomial(static_cast<double>(state.n), 1.0 - rho0, rng);
    for (auto& r : rho) r /= rho0;
    state.w = sample_multinomial(n0, rho, rng);
    state.N = state.n + n0;
}

void NestedSampler::nlcmcr_sweep(NestedModelState& state, RngState& rng) const {
    update_top_assignments(state, rng);
    update_bottom_assignments(state, rng);
    update_capture_probs(state, rng);
    update_weights_and_concentrations(state, rng);
    update_missing_and_N(state, rng);
#ifndef NDEBUG
    state.check_invariants(data_);
#endif
}

std::vector<std::string> NestedSampler::monitor_names() const {
    const int K = config_.k_star;
    const int L = config_.l_star;
    std::vector<std::string> names{"N", "alpha0"};
    for (int k = 1; k <= K; ++k) names.push_back("alpha_" + std::to_string(k));
    for (int k = 1; k <= K; ++k) names.push_back("pi2_" + std::to_string(k));
    for (int k = 1; k <= K; ++k) {
        for (int l = 1; l <= L; ++l) {
            names.push_back("pi1_" + std::to_string(k) + "_" + std::to_string(l));
        }
    }
    for (int k = 1; k <= K; ++k) names.push_back("n2_" + std::to_string(k));
    for (int k = 1; k <= K; ++k) names.push_back("g2_" + std::to_string(k));
    for (int k = 1; k <= K; ++k) {
        for (int l = 1; l <= L; ++l) {
            names.push_back("n1_" + std::to_string(k) + "_" + std::to_string(l));
        }
    }
    names.push_back("occ2");
    names.push_back("occ1");
    for (int k = 1; k <= K; ++k) {
        for (int l = 1; l <= L; ++l) {
            for (int s = 1; s <= data_.S; ++s) {
                names.push_back("lambda_" + std::to_string(k) + "_" + std::to_string(l) + "_" +
                                std::to_string(s));
            }
        }
    }
    return names;
}

std::vector<double> NestedSampler::monitor_row(const NestedModelState& state) const {
    const int K = state.K;
    const int L = state.L;
    std::vector<double> row;
    row.push_back(static_cast<double>(state.N));
    row.push_back(state.top_sticks.alpha);
    for (int k = 0; k < K; ++k) {
        row.push_back(state.bottom_sticks[static_cast<std::size_t>(k)].alpha);
    }
    for (int k = 0; k < K; ++k) {
        row.push_back(state.top_sticks.weights[static_cast<std::size_t>(k)]);
    }
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < L; ++l) {
            row.push_back(
                state.bottom_sticks[static_cast<std::size_t>(k)].weights[static_cast<std::size_t>(l)]);
        }
    }
    std::vector<long long> n2(static_cast<std::size_t>(K), 0);
    std::vector<long long> g2(static_cast<std::size_t>(K), 0);
    std::vector<long long> n1(static_cast<std::size_t>(K * L), 0);
    for (int g = 0; g < data_.J(); ++g) {
        const auto& gp = data_.groups[static_cast<std::size_t>(g)];
        const int k = state.z2[static_cast<std::size_t>(g)];
        n2[static_cast<std::size_t>(k)] += gp.n;
        g2[static_cast<std::size_t>(k)] += 1;
        for (int c = 0; c < gp.cells(); ++c) {
            const auto& cell =
                state.z1_counts[static_cast<std::size_t>(g)][static_cast<std::size_t>(c)];
            for (int l = 0; l < L; ++l) {
                n1[static_cast<std::size_t>(k * L + l)] += cell[static_cast<std::size_t>(l)];
            }
        }
    }
    for (int k = 0; k < K; ++k) row.push_back(static_cast<double>(n2[static_cast<std::size_t>(k)]));
    for (int k = 0; k < K; ++k) row.push_back(static_cast<double>(g2[static_cast<std::size_t>(k)]));
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < L; ++l) {
            row.push_back(static_cast<double>(n1[static_cast<std::size_t>(k * L + l)]));
        }
    }
    int occ2 = 0;
    int occ1 = 0;
    for (int k = 0; k < K; ++k) {
        long long tot = 0;
        for (int l = 0; l < L; ++l) {
            const long long cell = n1[static_cast<std::size_t>(k * L + l)] + state.w_at(k, l);
            if (cell > 0) ++occ1;
            tot += cell;
        }
        if (tot > 0) ++occ2;
    }
    row.push_back(static_cast<double>(occ2));
    row.push_back(static_cast<double>(occ1));
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < L; ++l) {
            for (int s = 0; s < state.S; ++s) row.push_back(state.lam(k, l, s));
        }
    }
    return row;
}

std::vector<ChainOutput> fit_nlcmcr(const PatternData& data, const McmcConfig& config) {
    if (data.n <= 0) throw validation_error("dataset must be nonempty");
    NestedSampler sampler(data, config);
    return detail::run_chains(
        sampler, config, "nlcmcr", data.n, config.k_star, config.l_star, data.S,
        [&sampler](NestedModelState& st, RngState& rng) { sampler.nlcmcr_sweep(st, rng); });
}

std::vector<ChainOutput> fit_nlcmcr(const GroupedDataset& data, const McmcConfig& config) {
    data.validate();
    return fit_nlcmcr(PatternData::from_dataset(data), config);
}

}  // namespace nlcmcr
