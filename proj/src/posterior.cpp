#include "nlcmcr/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "nlcmcr/errors.hpp"

namespace nlcmcr {

std::size_t ChainOutput::column(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw parameter_error("unknown monitored quantity: " + name);
    return static_cast<std::size_t>(it - names.begin());
}

std::vector<double> ChainOutput::series(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(draws.size());
    for (const auto& row : draws) out.push_back(row[c]);
    return out;
}

const QuantitySummary& PosteriorSummary::at(const std::string& name) const {
    for (const auto& q : quantities) {
        if (q.name == name) return q;
    }
    throw parameter_error("summary has no quantity named " + name);
}

double quantile_type7(std::vector<double> values, double q) {
    if (values.empty()) throw parameter_error("quantile of empty sample");
    if (q < 0.0 || q > 1.0) throw parameter_error("quantile level outside [0,1]");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - std::floor(h);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double effective_sample_size(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 10) throw parameter_error("effective_sample_size needs at least 10 draws");
    const double nd = static_cast<double>(n);
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= nd;
    auto autocov = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) {
            acc += (series[t] - mean) * (series[t + lag] - mean);
        }
        return acc / nd;
    };
    const double gamma0 = autocov(0);
    if (gamma0 <= 0.0) return nd;  // constant series; callers set the flag
    // Geyer initial positive sequence.
    double sigma2 = -gamma0;
    for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
        const double pair = autocov(2 * m) + autocov(2 * m + 1);
        if (pair <= 0.0) break;
        sigma2 += 2.0 * pair;
    }
    if (sigma2 <= 0.0) return nd;
    const double ess = nd * gamma0 / sigma2;
    return std::clamp(ess, 1e-12, nd);
}

namespace {

void check_schema(const std::vector<ChainOutput>& chains) {
    if (chains.empty()) throw parameter_error("no chains to summarize");
    for (const auto& c : chains) {
        if (c.draws.empty()) throw parameter_error("chain with no kept draws");
        if (c.model != chains[0].model || c.names != chains[0].names) {
            throw parameter_error("chain schema mismatch");
        }
    }
}

}  // namespace

PosteriorSummary summarize(const std::vector<ChainOutput>& chains, double level) {
    check_schema(chains);
    if (!(level > 0.0) || !(level < 1.0)) {
        throw parameter_error("credible level must lie in (0,1)");
    }
    PosteriorSummary out;
    out.level = level;
    out.model = chains[0].model;
    out.n = chains[0].n;
    const double q_lo = (1.0 - level) / 2.0;
    const double q_hi = 1.0 - q_lo;
    const auto& names = chains[0].names;
    for (std::size_t c = 0; c < names.size(); ++c) {
        std::vector<double> pooled;
        double ess = 0.0;
        for (const auto& chain : chains) {
            std::vector<double> series;
            series.reserve(chain.draws.size());
            for (const auto& row : chain.draws) series.push_back(row[c]);
            pooled.insert(pooled.end(), series.begin(), series.end());
            ess += chain.draws.size() >= 10 ? effective_sample_size(series)
                                            : static_cast<double>(series.size());
        }
        QuantitySummary q;
        q.name = names[c];
        q.mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) /
                 static_cast<double>(pooled.size());
        q.median = quantile_type7(pooled, 0.5);
        q.lower = quantile_type7(pooled, q_lo);
        q.upper = quantile_type7(pooled, q_hi);
        const auto [mn, mx] = std::minmax_element(pooled.begin(), pooled.end());
        q.zero_variance = (*mn == *mx);
        q.ess = q.zero_variance ? static_cast<double>(pooled.size()) : ess;
        out.quantities.push_back(std::move(q));
    }
    return out;
}

namespace {

std::array<double, 3> med_interval(std::vector<double>& values, double level) {
    const double q_lo = (1.0 - level) / 2.0;
    return {quantile_type7(values, 0.5), quantile_type7(values, q_lo),
            quantile_type7(values, 1.0 - q_lo)};
}

}  // namespace

std::vector<RelabeledTopClass> relabel_classes(const std::vector<ChainOutput>& chains,
                                               double level) {
    check_schema(chains);
    const auto& head = chains[0];
    const bool nested = head.model == "nlcmcr";
    // Chains written before group counts were monitored lack g2 columns;
    // group_share stays zero for them.
    const bool have_g2 =
        nested && std::find(head.names.begin(), head.names.end(), "g2_1") != head.names.end();
    const int K = head.K;
    const int L = nested ? head.L : 1;
    const int S = head.S;

    // Column lookup tables.
    std::vector<std::size_t> pi2_col(static_cast<std::size_t>(K));
    std::vector<std::size_t> occ2_col(static_cast<std::size_t>(K));
    std::vector<std::size_t> g2_col(static_cast<std::size_t>(K));
    std::vector<std::size_t> pi1_col(static_cast<std::size_t>(K * L));
    std::vector<std::size_t> occ1_col(static_cast<std::size_t>(K * L));
    std::vector<std::size_t> lam_col(static_cast<std::size_t>(K * L * S));
    for (int k = 0; k < K; ++k) {
        const std::string ks = std::to_string(k + 1);
        pi2_col[static_cast<std::size_t>(k)] = head.column(nested ? "pi2_" + ks : "pi_" + ks);
        occ2_col[static_cast<std::size_t>(k)] = head.column(nested ? "n2_" + ks : "nk_" + ks);
        if (have_g2) g2_col[static_cast<std::size_t>(k)] = head.column("g2_" + ks);
        for (int l = 0; l < L; ++l) {
            const std::string ls = std::to_string(l + 1);
            if (nested) {
                pi1_col[static_cast<std::size_t>(k * L + l)] = head.column("pi1_" + ks + "_" + ls);
                occ1_col[static_cast<std::size_t>(k * L + l)] = head.column("n1_" + ks + "_" + ls);
            } else {
                pi1_col[static_cast<std::size_t>(k * L + l)] = pi2_col[static_cast<std::size_t>(k)];
                occ1_col[static_cast<std::size_t>(k * L + l)] = occ2_col[static_cast<std::size_t>(k)];
            }
            for (int s = 0; s < S; ++s) {
                const std::string name = nested
                                             ? "lambda_" + ks + "_" + ls + "_" + std::to_string(s + 1)
                                             : "lambda_" + ks + "_" + std::to_string(s + 1);
                lam_col[static_cast<std::size_t>((k * L + l) * S + s)] = head.column(name);
            }
        }
    }

    // Accumulate per sorted slot across all draws of all chains.
    struct CellAcc {
        std::vector<double> pi1;
        std::vector<std::vector<double>> lambda;
        double occ_sum = 0.0;
    };
    struct TopAcc {
        std::vector<double> pi2;
        std::vector<double> gshare;
        double occ_sum = 0.0;
        std::vector<CellAcc> cells;
    };
    std::vector<TopAcc> acc(static_cast<std::size_t>(K));
    for (auto& t : acc) {
        t.cells.resize(static_cast<std::size_t>(L));
        for (auto& c : t.cells) c.lambda.resize(static_cast<std::size_t>(S));
    }
    std::size_t total_draws = 0;
    double total_groups = 1.0;
    if (have_g2 && !head.draws.empty()) {
        total_groups = 0.0;
        for (int k = 0; k < K; ++k) {
            total_groups += head.draws[0][g2_col[static_cast<std::size_t>(k)]];
        }
        if (total_groups <= 0.0) total_groups = 1.0;
    }

    std::vector<int> top_order(static_cast<std::size_t>(K));
    std::vector<int> bottom_order(static_cast<std::size_t>(L));
    for (const auto& chain : chains) {
        for (const auto& row : chain.draws) {
            ++total_draws;
            std::iota(top_order.begin(), top_order.end(), 0);
            std::sort(top_order.begin(), top_order.end(), [&](int a, int b) {
                return row[pi2_col[static_cast<std::size_t>(a)]] >
                       row[pi2_col[static_cast<std::size_t>(b)]];
            });
            for (int slot = 0; slot < K; ++slot) {
                const int k = top_order[static_cast<std::size_t>(slot)];
                auto& t = acc[static_cast<std::size_t>(slot)];
                t.pi2.push_back(row[pi2_col[static_cast<std::size_t>(k)]]);
                t.occ_sum += row[occ2_col[static_cast<std::size_t>(k)]];
                if (have_g2) {
                    t.gshare.push_back(row[g2_col[static_cast<std::size_t>(k)]] /
                                       static_cast<double>(total_groups));
                }
                std::iota(bottom_order.begin(), bottom_order.end(), 0);
                std::sort(bottom_order.begin(), bottom_order.end(), [&](int a, int b) {
                    return row[pi1_col[static_cast<std::size_t>(k * L + a)]] >
                           row[pi1_col[static_cast<std::size_t>(k * L + b)]];
                });
                for (int cslot = 0; cslot < L; ++cslot) {
                    const int l = bottom_order[static_cast<std::size_t>(cslot)];
                    auto& cell = t.cells[static_cast<std::size_t>(cslot)];
                    cell.pi1.push_back(row[pi1_col[static_cast<std::size_t>(k * L + l)]]);
                    cell.occ_sum += row[occ1_col[static_cast<std::size_t>(k * L + l)]];
                    for (int s = 0; s < S; ++s) {
                        cell.lambda[static_cast<std::size_t>(s)].push_back(
                            row[lam_col[static_cast<std::size_t>((k * L + l) * S + s)]]);
                    }
                }
            }
        }
    }

    // Weights are reported as per-draw shares of the slots that survive the
    // occupancy cutoff, so each printed level sums to one. Unused truncation
    // slots retain a few percent of stick mass under the prior, which would
    // otherwise bias every reported weight low.
    const double nd = static_cast<double>(total_draws);
    std::vector<std::size_t> kept;
    for (std::size_t slot = 0; slot < acc.size(); ++slot) {
        if (acc[slot].occ_sum / nd >= 1.0) kept.push_back(slot);
    }
    for (std::size_t d = 0; d < total_draws; ++d) {
        double tot = 0.0;
        for (auto slot : kept) tot += acc[slot].pi2[d];
        if (tot <= 0.0) continue;
        for (auto slot : kept) acc[slot].pi2[d] /= tot;
    }
    for (auto slot : kept) {
        auto& t = acc[slot];
        std::vector<std::size_t> kept_cells;
        for (std::size_t c = 0; c < t.cells.size(); ++c) {
            if (t.cells[c].occ_sum / nd >= 1.0) kept_cells.push_back(c);
        }
        for (std::size_t d = 0; d < total_draws; ++d) {
            double tot = 0.0;
            for (auto c : kept_cells) tot += t.cells[c].pi1[d];
            if (tot <= 0.0) continue;
            for (auto c : kept_cells) t.cells[c].pi1[d] /= tot;
        }
    }

    std::vector<RelabeledTopClass> out;
    for (auto slot : kept) {
        auto& t = acc[slot];
        RelabeledTopClass top;
        top.mean_occupancy = t.occ_sum / nd;
        top.pi2 = med_interval(t.pi2, level);
        if (have_g2) top.group_share = med_interval(t.gshare, level);
        for (auto& c : t.cells) {
            RelabeledCell cell;
            cell.mean_occupancy = c.occ_sum / nd;
            if (cell.mean_occupancy < 1.0) continue;
            cell.pi1 = med_interval(c.pi1, level);
            for (auto& lam : c.lambda) cell.lambda.push_back(med_interval(lam, level));
            top.cells.push_back(std::move(cell));
        }
        out.push_back(std::move(top));
    }
    return out;
}

void write_chain_csv(std::ostream& out, const ChainOutput& chain) {
    out << "# nlcmcr-chain v1\n";
    out << "# model=" << chain.model << " chain=" << chain.chain_id << " seed=" << chain.seed
        << " K=" << chain.K << " L=" << chain.L << " S=" << chain.S << " n=" << chain.n << "\n";
    out << "# config " << chain.config_echo << "\n";
    for (std::size_t c = 0; c < chain.names.size(); ++c) {
        out << (c ? "," : "") << chain.names[c];
    }
    out << "\n";
    out << std::setprecision(17);
    for (const auto& row : chain.draws) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
        out << "\n";
    }
}

ChainOutput read_chain_csv(std::istream& in) {
    ChainOutput chain;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string tok;
            if (line.rfind("# config ", 0) == 0) {
                chain.config_echo = line.substr(9);
                continue;
            }
            while (meta >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = tok.substr(0, eq);
                const std::string val = tok.substr(eq + 1);
                if (key == "model") chain.model = val;
                else if (key == "chain") chain.chain_id = std::stoi(val);
                else if (key == "seed") chain.seed = std::stoull(val);
                else if (key == "K") chain.K = std::stoi(val);
                else if (key == "L") chain.L = std::stoi(val);
                else if (key == "S") chain.S = std::stoi(val);
                else if (key == "n") chain.n = std::stoll(val);
            }
            continue;
        }
        std::istringstream row_in(line);
        std::string field;
        if (!have_header) {
            while (std::getline(row_in, field, ',')) chain.names.push_back(field);
            have_header = true;
            continue;
        }
        std::vector<double> row;
        row.reserve(chain.names.size());
        while (std::getline(row_in, field, ',')) row.push_back(std::stod(field));
        if (row.size() != chain.names.size()) throw parse_error("chain row width mismatch");
        chain.draws.push_back(std::move(row));
    }
    if (!have_header) throw parse_error("chain file has no header");
    return chain;
}

void write_summary_table(std::ostream& out, const PosteriorSummary& summary) {
    out << "model " << summary.model << ", n = " << summary.n << ", level = " << summary.level
        << "\n";
    out << std::left << std::setw(18) << "quantity" << std::right << std::setw(14) << "mean"
        << std::setw(14) << "median" << std::setw(14) << "lower" << std::setw(14) << "upper"
        << std::setw(12) << "ess" << "\n";
    for (const auto& q : summary.quantities) {
        out << std::left << std::setw(18) << q.name << std::right << std::setprecision(6)
            << std::setw(14) << q.mean << std::setw(14) << q.median << std::setw(14) << q.lower
            << std::setw(14) << q.upper << std::setw(12) << std::setprecision(1) << std::fixed
            << q.ess << std::defaultfloat << (q.zero_variance ? "  (zero variance)" : "")
            << "\n";
    }
}

void write_summary_keyvalue(std::ostream& out, const PosteriorSummary& summary) {
    out << "# nlcmcr-summary v1\n";
    out << std::setprecision(17);
    out << "model " << summary.model << "\n";
    out << "n " << summary.n << "\n";
    out << "level " << summary.level << "\n";
    for (const auto& q : summary.quantities) {
        out << q.name << ".mean " << q.mean << "\n";
        out << q.name << ".median " << q.median << "\n";
        out << q.name << ".lower " << q.lower << "\n";
        out << q.name << ".upper " << q.upper << "\n";
        out << q.name << ".ess " << q.ess << "\n";
        if (q.zero_variance) out << q.name << ".zero_variance 1\n";
    }
}

void write_relabeled_table(std::ostream& out, const std::vector<RelabeledTopClass>& classes) {
    out << std::setprecision(4);
    for (std::size_t slot = 0; slot < classes.size(); ++slot) {
        const auto& top = classes[slot];
        out << "class " << (slot + 1) << ": weight " << top.pi2[0] << " (" << top.pi2[1] << ","
            << top.pi2[2] << ")";
        if (top.group_share[2] > 0.0) {
            out << ", group share " << top.group_share[0] << " (" << top.group_share[1] << ","
                << top.group_share[2] << ")";
        }
        out << ", mean records " << top.mean_occupancy << "\n";
        for (std::size_t c = 0; c < top.cells.size(); ++c) {
            const auto& cell = top.cells[c];
            out << "  cell " << (c + 1) << ": weight " << cell.pi1[0] << " (" << cell.pi1[1]
                << "," << cell.pi1[2] << ") lambda";
            for (const auto& lam : cell.lambda) {
                out << " " << lam[0] << "(" << lam[1] << "," << lam[2] << ")";
            }
            out << "\n";
        }
    }
}

}  // namespace nlcmcr
