#pragma once

#include <exception>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nlcmcr/chain.hpp"
#include "nlcmcr/config.hpp"
#include "nlcmcr/errors.hpp"
#include "nlcmcr/rng.hpp"

namespace nlcmcr::detail {

inline std::string describe_config(const McmcConfig& c, const std::string& model) {
    std::ostringstream out;
    out << "model=" << model << " k_star=" << c.k_star << " l_star=" << c.l_star
        << " iterations=" << c.iterations << " burn_in=" << c.burn_in
        << " thinning=" << c.thinning << " chains=" << c.chains << " a0=" << c.a0
        << " b0=" << c.b0 << " ak=" << c.ak << " bk=" << c.bk << " seed=" << c.seed
        << " occupancy="
        << (c.occupancy == TopOccupancy::individuals ? "individuals" : "groups");
    return out.str();
}

// Runs `config.chains` chains on disjoint RNG streams, one thread each.
// Sampler must provide init_state / a sweep callable / monitor_names /
// monitor_row.
template <typename Sampler, typename SweepFn>
std::vector<ChainOutput> run_chains(const Sampler& sampler, const McmcConfig& config,
                                    const std::string& model, long long n, int K, int L, int S,
                                    SweepFn sweep) {
    config.validate();
    const int total_sweeps = config.burn_in + config.iterations;
    std::vector<ChainOutput> chains(static_cast<std::size_t>(config.chains));
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(config.chains));

    auto run_one = [&](int c) {
        try {
            ChainOutput out;
            out.model = model;
            out.chain_id = c + 1;
            out.seed = config.seed;
            out.K = K;
            out.L = L;
            out.S = S;
            out.n = n;
            out.config_echo = describe_config(config, model);
            out.names = sampler.monitor_names();
            RngState rng(config.seed, static_cast<std::uint64_t>(c));
            auto state = sampler.init_state(rng);
            for (int it = 0; it < total_sweeps; ++it) {
                try {
                    sweep(state, rng);
                } catch (const degeneracy_error& e) {
                    throw degeneracy_error(std::string(e.what()) + " (chain " +
                                               std::to_string(c + 1) + ", sweep " +
                                               std::to_string(it + 1) + ")",
                                           it + 1);
                }
                const int kept = it - config.burn_in;
                if (kept >= 0 && kept % config.thinning == 0) {
                    out.draws.push_back(sampler.monitor_row(state));
                }
            }
            chains[static_cast<std::size_t>(c)] = std::move(out);
        } catch (...) {
            failures[static_cast<std::size_t>(c)] = std::current_exception();
        }
    };

    if (config.chains == 1) {
        run_one(0);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(config.chains));
        for (int c = 0; c < config.chains; ++c) workers.emplace_back(run_one, c);
        for (auto& t : workers) t.join();
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    return chains;
}

}  // namespace nlcmcr::detail
