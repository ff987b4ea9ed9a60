#include <array>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "nlcmcr/errors.hpp"
#include "nlcmcr/posterior.hpp"
#include "nlcmcr/rng.hpp"

using namespace nlcmcr;

namespace {

ChainOutput single_column_chain(const std::vector<double>& values, int id = 1) {
    ChainOutput chain;
    chain.model = "lcmcr";
    chain.chain_id = id;
    chain.K = 1;
    chain.S = 2;
    chain.n = 10;
    chain.names = {"N"};
    for (double v : values) chain.draws.push_back({v});
    return chain;
}

}  // namespace

TEST_CASE("type-7 quantiles") {
    std::vector<double> draws(100);
    std::iota(draws.begin(), draws.end(), 1.0);
    CHECK(quantile_type7(draws, 0.5) == doctest::Approx(50.5));
    CHECK(quantile_type7(draws, 0.025) == doctest::Approx(3.475));
    CHECK(quantile_type7(draws, 0.975) == doctest::Approx(97.525));
    CHECK(quantile_type7(draws, 0.0) == doctest::Approx(1.0));
    CHECK(quantile_type7(draws, 1.0) == doctest::Approx(100.0));
    CHECK_THROWS_AS(quantile_type7({}, 0.5), parameter_error);
    CHECK_THROWS_AS(quantile_type7({1.0}, 1.5), parameter_error);
}

TEST_CASE("effective sample size") {
    RngState rng(31);
    std::vector<double> iid(10000);
    for (auto& v : iid) v = rng.normal();
    const double ess_iid = effective_sample_size(iid);
    CHECK(ess_iid > 9000.0);
    CHECK(ess_iid <= 10000.0);

    // AR(1) with coefficient 0.9: ESS about length * 0.1 / 1.9.
    std::vector<double> ar(40000);
    ar[0] = rng.normal();
    for (std::size_t i = 1; i < ar.size(); ++i) ar[i] = 0.9 * ar[i - 1] + rng.normal();
    const double expected = static_cast<double>(ar.size()) * (1.0 - 0.9) / (1.0 + 0.9);
    CHECK(effective_sample_size(ar) == doctest::Approx(expected).epsilon(0.2));

    const std::vector<double> constant(100, 3.0);
    CHECK(effective_sample_size(constant) == doctest::Approx(100.0));
    CHECK_THROWS_AS(effective_sample_size(std::vector<double>(5, 1.0)), parameter_error);
}

TEST_CASE("summarize pools chains") {
    const auto constant = single_column_chain(std::vector<double>(20, 100.0));
    const auto s = summarize({constant}, 0.95);
    CHECK(s.at("N").median == doctest::Approx(100.0));
    CHECK(s.at("N").lower == doctest::Approx(100.0));
    CHECK(s.at("N").upper == doctest::Approx(100.0));
    CHECK(s.at("N").zero_variance);
    CHECK(s.at("N").ess == doctest::Approx(20.0));

    std::vector<double> ramp(100);
    std::iota(ramp.begin(), ramp.end(), 1.0);
    const auto one = single_column_chain(ramp, 1);
    const auto two = single_column_chain(ramp, 2);
    const auto s1 = summarize({one}, 0.95);
    const auto s2 = summarize({one, two}, 0.95);
    CHECK(s2.at("N").median == doctest::Approx(s1.at("N").median));
    CHECK(s2.at("N").mean == doctest::Approx(s1.at("N").mean));
    // Quantile interpolation depends on the pooled sample size, so the
    // duplicated-chain interval only matches up to one grid step.
    CHECK(s2.at("N").lower == doctest::Approx(s1.at("N").lower).epsilon(0.2));
    CHECK(s2.at("N").upper == doctest::Approx(s1.at("N").upper).epsilon(0.2));

    const auto swapped = summarize({two, one}, 0.95);
    CHECK(swapped.at("N").mean == doctest::Approx(s2.at("N").mean));

    CHECK_THROWS_AS(summarize({}, 0.95), parameter_error);
    auto other = one;
    other.names = {"M"};
    CHECK_THROWS_AS(summarize({one, other}, 0.95), parameter_error);
    CHECK_THROWS_AS(summarize({one}, 1.5), parameter_error);
}

namespace {

// Tiny two-class nlcmcr-schema chain with known pi2 values per draw.
ChainOutput nested_chain(const std::vector<std::array<double, 2>>& pi2_draws) {
    ChainOutput chain;
    chain.model = "nlcmcr";
    chain.chain_id = 1;
    chain.K = 2;
    chain.L = 1;
    chain.S = 2;
    chain.n = 100;
    chain.names = {"N",     "alpha0", "alpha_1", "alpha_2", "pi2_1", "pi2_2",
                   "pi1_1_1", "pi1_2_1", "n2_1",  "n2_2",  "n1_1_1", "n1_2_1",
                   "occ2",  "occ1",   "lambda_1_1_1", "lambda_1_1_2",
                   "lambda_2_1_1", "lambda_2_1_2"};
    for (const auto& pi2 : pi2_draws) {
        // lambda rows keyed to the class so relabeling is observable.
        chain.draws.push_back({100.0, 1.0, 1.0, 1.0, pi2[0], pi2[1], 1.0, 1.0,
                               60.0 * pi2[0] + 0.5, 60.0 * pi2[1] + 0.5, 60.0, 40.0, 2.0,
                               2.0, 0.1 + pi2[0], 0.2, 0.1 + pi2[1], 0.4});
    }
    return chain;
}

}  // namespace

TEST_CASE("relabeling sorts by descending class weight") {
    const auto chain = nested_chain({{0.3, 0.7}, {0.8, 0.2}, {0.4, 0.6}});
    const auto slots = relabel_classes({chain}, 0.95);
    REQUIRE(slots.size() == 2);
    CHECK(slots[0].pi2[0] == doctest::Approx(0.7));
    CHECK(slots[1].pi2[0] == doctest::Approx(0.3));
    // Slot 1 lambda follows the larger class in every draw.
    CHECK(slots[0].cells[0].lambda[0][0] == doctest::Approx(0.8));

    // Swapping the class labels of every draw changes nothing.
    const auto swapped = nested_chain({{0.7, 0.3}, {0.2, 0.8}, {0.6, 0.4}});
    const auto slots2 = relabel_classes({swapped}, 0.95);
    REQUIRE(slots2.size() == 2);
    CHECK(slots2[0].pi2[0] == doctest::Approx(slots[0].pi2[0]));
    CHECK(slots2[0].cells[0].lambda[0][0] ==
          doctest::Approx(slots[0].cells[0].lambda[0][0]));
}

TEST_CASE("relabeling drops empty slots") {
    ChainOutput chain = nested_chain({{0.99, 0.01}, {0.995, 0.005}});
    // Force the second class to hold (almost) no records.
    for (auto& row : chain.draws) {
        row[chain.column("n2_2")] = 0.0;
    }
    const auto slots = relabel_classes({chain}, 0.95);
    CHECK(slots.size() == 1);
}

TEST_CASE("chain csv round trip") {
    auto chain = single_column_chain({1.5, 2.25, 3.125});
    chain.names = {"N"};
    chain.seed = 99;
    chain.config_echo = "k_star=1 seed=99";
    std::ostringstream out;
    write_chain_csv(out, chain);
    std::istringstream in(out.str());
    const auto reread = read_chain_csv(in);
    CHECK(reread.model == chain.model);
    CHECK(reread.chain_id == chain.chain_id);
    CHECK(reread.seed == chain.seed);
    CHECK(reread.K == chain.K);
    CHECK(reread.S == chain.S);
    CHECK(reread.n == chain.n);
    CHECK(reread.names == chain.names);
    REQUIRE(reread.draws.size() == chain.draws.size());
    for (std::size_t i = 0; i < chain.draws.size(); ++i) {
        CHECK(reread.draws[i][0] == chain.draws[i][0]);
    }
    CHECK(out.str().rfind("# nlcmcr-chain v1\n", 0) == 0);
}

TEST_CASE("summary writers") {
    const auto s = summarize({single_column_chain({1, 2, 3, 4, 5})}, 0.9);
    std::ostringstream table, kv;
    write_summary_table(table, s);
    write_summary_keyvalue(kv, s);
    CHECK(table.str().find("quantity") != std::string::npos);
    CHECK(kv.str().rfind("# nlcmcr-summary v1\n", 0) == 0);
    CHECK(kv.str().find("N.median 3") != std::string::npos);
}
