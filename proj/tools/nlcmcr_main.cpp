#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nlcmcr/data.hpp"
#include "nlcmcr/errors.hpp"
#include "nlcmcr/lcmcr.hpp"
#include "nlcmcr/nlcmcr.hpp"
#include "nlcmcr/posterior.hpp"
#include "nlcmcr/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "nlcmcr 1.0.0";

std::string fnv1a_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw nlcmcr::validation_error("cannot read " + path.string());
    std::uint64_t hash = 14695981039346656037ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ull;
        }
    }
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << hash;
    return hex.str();
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct Manifest {
    json body;

    Manifest(const std::string& command, const std::vector<std::string>& args) {
        body["command"] = command;
        body["argv"] = args;
        body["version"] = kVersion;
        body["start"] = timestamp_utc();
        body["inputs"] = json::object();
        body["outputs"] = json::array();
    }
    void add_input(const fs::path& path) { body["inputs"][path.string()] = fnv1a_digest(path); }
    void add_output(const fs::path& path) { body["outputs"].push_back(path.string()); }
    void write(const fs::path& dir) {
        body["end"] = timestamp_utc();
        std::ofstream out(dir / "manifest.json");
        out << body.dump(2) << "\n";
        if (!out) throw nlcmcr::validation_error("cannot write manifest in " + dir.string());
    }
};

// Flat key-value config text: one key per line, values space separated,
// '#' starts a comment.
std::map<std::string, std::vector<std::string>> read_keyvalue(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw nlcmcr::parameter_error("cannot open config " + path.string());
    std::map<std::string, std::vector<std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        std::string key;
        if (!(row >> key)) continue;
        std::vector<std::string> values;
        std::string v;
        while (row >> v) values.push_back(v);
        out[key] = std::move(values);
    }
    return out;
}

double to_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw nlcmcr::parameter_error("bad numeric value: " + s);
    }
}

long long to_ll(const std::string& s) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw nlcmcr::parameter_error("bad integer value: " + s);
    }
}

nlcmcr::SimulationConfig parse_sim_config(const fs::path& path) {
    const auto kv = read_keyvalue(path);
    auto need = [&](const char* key) -> const std::vector<std::string>& {
        const auto it = kv.find(key);
        if (it == kv.end() || it->second.empty()) {
            throw nlcmcr::parameter_error(std::string("config missing key: ") + key);
        }
        return it->second;
    };
    nlcmcr::SimulationConfig cfg;
    cfg.S = static_cast<int>(to_ll(need("S")[0]));
    cfg.J = static_cast<int>(to_ll(need("J")[0]));
    cfg.N = to_ll(need("N")[0]);
    for (const auto& v : need("top_props")) cfg.top_props.push_back(to_double(v));
    const int K = static_cast<int>(cfg.top_props.size());
    for (int k = 1; k <= K; ++k) {
        std::vector<double> bottom;
        for (const auto& v : need(("bottom_props_" + std::to_string(k)).c_str())) {
            bottom.push_back(to_double(v));
        }
        std::vector<std::vector<double>> rows;
        for (std::size_t l = 1; l <= bottom.size(); ++l) {
            std::vector<double> row;
            const std::string key = "capture_probs_" + std::to_string(k) + "_" + std::to_string(l);
            for (const auto& v : need(key.c_str())) row.push_back(to_double(v));
            rows.push_back(std::move(row));
        }
        cfg.bottom_props.push_back(std::move(bottom));
        cfg.capture_probs.push_back(std::move(rows));
    }
    if (const auto it = kv.find("group_sizes"); it != kv.end()) {
        std::vector<long long> sizes;
        for (const auto& v : it->second) sizes.push_back(to_ll(v));
        cfg.group_sizes = std::move(sizes);
    } else {
        nlcmcr::GroupSizeRule rule;
        if (const auto it2 = kv.find("group_mu"); it2 != kv.end()) rule.mu = to_double(it2->second.at(0));
        if (const auto it3 = kv.find("group_sigma"); it3 != kv.end()) {
            rule.sigma = to_double(it3->second.at(0));
        }
        cfg.group_sizes = rule;
    }
    return cfg;
}

void apply_fit_config_file(const fs::path& path, nlcmcr::McmcConfig& cfg) {
    const auto kv = read_keyvalue(path);
    auto get = [&](const char* key, auto setter) {
        if (const auto it = kv.find(key); it != kv.end() && !it->second.empty()) {
            setter(it->second[0]);
        }
    };
    get("k_star", [&](const std::string& v) { cfg.k_star = static_cast<int>(to_ll(v)); });
    get("l_star", [&](const std::string& v) { cfg.l_star = static_cast<int>(to_ll(v)); });
    get("iterations", [&](const std::string& v) { cfg.iterations = static_cast<int>(to_ll(v)); });
    get("burn_in", [&](const std::string& v) { cfg.burn_in = static_cast<int>(to_ll(v)); });
    get("thinning", [&](const std::string& v) { cfg.thinning = static_cast<int>(to_ll(v)); });
    get("chains", [&](const std::string& v) { cfg.chains = static_cast<int>(to_ll(v)); });
    get("seed", [&](const std::string& v) { cfg.seed = static_cast<std::uint64_t>(to_ll(v)); });
    get("a0", [&](const std::string& v) { cfg.a0 = to_double(v); });
    get("b0", [&](const std::string& v) { cfg.b0 = to_double(v); });
    get("ak", [&](const std::string& v) { cfg.ak = to_double(v); });
    get("bk", [&](const std::string& v) { cfg.bk = to_double(v); });
    get("occupancy", [&](const std::string& v) {
        if (v == "individuals") cfg.occupancy = nlcmcr::TopOccupancy::individuals;
        else if (v == "groups") cfg.occupancy = nlcmcr::TopOccupancy::groups;
        else throw nlcmcr::parameter_error("occupancy must be individuals or groups");
    });
}

// The aggregate format's header starts with "pattern"; record-level input
// starts with "list_1".
bool looks_aggregated(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw nlcmcr::validation_error("cannot open data file " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        return line.compare(first, 7, "pattern") == 0;
    }
    throw nlcmcr::validation_error("data file is empty: " + path.string());
}

void ensure_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw nlcmcr::validation_error("cannot create output directory " + dir.string());
    }
}

int cmd_simulate(const std::vector<std::string>& argv, const std::string& config_path,
                 bool paper_sim, int replicates, std::uint64_t seed, const std::string& out_dir) {
    if (paper_sim == !config_path.empty()) {
        throw nlcmcr::parameter_error("simulate needs exactly one of --config and --paper-sim");
    }
    if (replicates < 1) throw nlcmcr::parameter_error("--replicates must be positive");
    const nlcmcr::SimulationConfig cfg =
        paper_sim ? nlcmcr::paper_sim_config() : parse_sim_config(config_path);
    cfg.validate();

    ensure_out_dir(out_dir);
    Manifest manifest("simulate", argv);
    manifest.body["seed"] = seed;
    if (!config_path.empty()) manifest.add_input(config_path);

    for (int r = 0; r < replicates; ++r) {
        nlcmcr::RngState rng(seed, static_cast<std::uint64_t>(r));
        const auto result = nlcmcr::simulate_two_layer(cfg, rng);
        const std::string stem = "sim_rep" + std::to_string(r + 1);
        const fs::path data_path = fs::path(out_dir) / (stem + ".csv");
        const fs::path truth_path = fs::path(out_dir) / (stem + "_truth.txt");
        {
            std::ofstream out(data_path);
            nlcmcr::write_records_csv(out, result.dataset);
            if (!out) throw nlcmcr::validation_error("cannot write " + data_path.string());
        }
        {
            std::ofstream out(truth_path);
            nlcmcr::write_truth(out, result.truth);
            if (!out) throw nlcmcr::validation_error("cannot write " + truth_path.string());
        }
        manifest.add_output(data_path);
        manifest.add_output(truth_path);
    }
    manifest.write(out_dir);
    std::cout << "wrote " << replicates << " replicate(s) to " << out_dir << "\n";
    return 0;
}

std::string config_echo(const nlcmcr::McmcConfig& cfg) {
    std::ostringstream out;
    out << "k_star=" << cfg.k_star << " l_star=" << cfg.l_star << " iterations=" << cfg.iterations
        << " burn_in=" << cfg.burn_in << " thinning=" << cfg.thinning << " chains=" << cfg.chains
        << " a0=" << cfg.a0 << " b0=" << cfg.b0 << " ak=" << cfg.ak << " bk=" << cfg.bk
        << " seed=" << cfg.seed << " occupancy="
        << (cfg.occupancy == nlcmcr::TopOccupancy::individuals ? "individuals" : "groups");
    return out.str();
}

int cmd_fit(const std::vector<std::string>& argv, const std::string& model,
            const std::string& data_path, const nlcmcr::McmcConfig& cfg, double level,
            const std::string& out_dir) {
    cfg.validate();
    if (!(level > 0.0) || !(level < 1.0)) {
        throw nlcmcr::parameter_error("--level must lie in (0,1)");
    }
    const bool aggregated = looks_aggregated(data_path);
    if (aggregated && model == "nlcmcr") {
        throw nlcmcr::parameter_error("nlcmcr requires record-level input with a group column");
    }

    ensure_out_dir(out_dir);
    Manifest manifest("fit", argv);
    manifest.add_input(data_path);
    manifest.body["model"] = model;
    manifest.body["config"] = config_echo(cfg);

    std::vector<nlcmcr::ChainOutput> chains;
    std::ifstream in(data_path);
    if (!in) throw nlcmcr::validation_error("cannot open data file " + data_path);
    if (aggregated) {
        chains = nlcmcr::fit_lcmcr(nlcmcr::parse_pattern_counts(in), cfg);
    } else {
        const auto ds = nlcmcr::parse_records(in);
        if (model == "nlcmcr" && ds.groups.size() == 1 && ds.groups[0].key == "_all") {
            throw nlcmcr::parameter_error(
                "nlcmcr requires record-level input with a group column");
        }
        chains = model == "lcmcr" ? nlcmcr::fit_lcmcr(ds, cfg) : nlcmcr::fit_nlcmcr(ds, cfg);
    }

    for (const auto& chain : chains) {
        const fs::path path =
            fs::path(out_dir) / ("chain_" + std::to_string(chain.chain_id) + ".csv");
        std::ofstream out(path);
        nlcmcr::write_chain_csv(out, chain);
        if (!out) throw nlcmcr::validation_error("cannot write " + path.string());
        manifest.add_output(path);
    }

    const auto summary = nlcmcr::summarize(chains, level);
    const fs::path summary_path = fs::path(out_dir) / "summary.txt";
    {
        std::ofstream out(summary_path);
        nlcmcr::write_summary_keyvalue(out, summary);
        if (!out) throw nlcmcr::validation_error("cannot write " + summary_path.string());
    }
    manifest.add_output(summary_path);
    manifest.write(out_dir);

    const auto& N = summary.at("N");
    std::cout << "model " << model << ", n = " << summary.n << "\n";
    std::cout << "N median " << N.median << ", " << 100.0 * level << "% interval (" << N.lower
              << ", " << N.upper << ")\n";
    return 0;
}

int cmd_summarize(const std::vector<std::string>& chain_paths, double level, bool relabel,
                  const std::string& trace_out) {
    if (!(level > 0.0) || !(level < 1.0)) {
        throw nlcmcr::parameter_error("--level must lie in (0,1)");
    }
    std::vector<nlcmcr::ChainOutput> chains;
    for (const auto& path : chain_paths) {
        std::ifstream in(path);
        if (!in) throw nlcmcr::validation_error("cannot open chain file " + path);
        chains.push_back(nlcmcr::read_chain_csv(in));
    }
    const auto summary = nlcmcr::summarize(chains, level);
    nlcmcr::write_summary_table(std::cout, summary);
    if (relabel) {
        std::cout << "\nrelabeled classes (slots with mean occupancy < 1 dropped):\n";
        nlcmcr::write_relabeled_table(std::cout, nlcmcr::relabel_classes(chains, level));
    }
    if (!trace_out.empty()) {
        std::ofstream out(trace_out);
        out << "# nlcmcr-trace v1\n";
        std::vector<std::string> cols = {"N"};
        for (const auto& name : chains[0].names) {
            if (name.rfind("pi", 0) == 0) cols.push_back(name);
        }
        out << "chain,iteration";
        for (const auto& c : cols) out << "," << c;
        out << "\n";
        for (const auto& chain : chains) {
            for (std::size_t i = 0; i < chain.draws.size(); ++i) {
                out << chain.chain_id << "," << (i + 1);
                for (const auto& c : cols) out << "," << chain.draws[i][chain.column(c)];
                out << "\n";
            }
        }
        if (!out) throw nlcmcr::validation_error("cannot write " + trace_out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nested latent class models for multi-list capture-recapture"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    std::vector<std::string> args(argv, argv + argc);

    auto* sim = app.add_subcommand("simulate", "Generate two-layer latent class datasets");
    std::string sim_config;
    bool paper_sim = false;
    int replicates = 1;
    std::uint64_t sim_seed = 0;
    std::string sim_out = ".";
    sim->add_option("--config", sim_config, "Simulation config file (key-value text)");
    sim->add_flag("--paper-sim", paper_sim, "Use the built-in simulation-study preset");
    sim->add_option("--replicates", replicates, "Number of replicate datasets");
    sim->add_option("--seed", sim_seed, "Base seed; replicate r uses stream r");
    sim->add_option("--out-dir", sim_out, "Output directory");

    auto* fit = app.add_subcommand("fit", "Fit a capture-recapture model");
    std::string model, data_path, fit_config;
    std::string fit_out = ".";
    double fit_level = 0.95;
    nlcmcr::McmcConfig mcmc;
    fit->add_option("--model", model, "lcmcr or nlcmcr")
        ->required()
        ->check(CLI::IsMember({"lcmcr", "nlcmcr"}));
    fit->add_option("--data", data_path, "Input CSV (record-level or pattern,count)")->required();
    fit->add_option("--config", fit_config, "MCMC config file; flags override its values");
    auto* k_opt = fit->add_option("--k-star", mcmc.k_star, "Top-layer truncation");
    auto* l_opt = fit->add_option("--l-star", mcmc.l_star, "Bottom-layer truncation");
    auto* it_opt = fit->add_option("--iterations", mcmc.iterations, "Kept iterations per chain");
    auto* burn_opt = fit->add_option("--burn-in", mcmc.burn_in, "Discarded iterations per chain");
    auto* thin_opt = fit->add_option("--thin", mcmc.thinning, "Keep every thin-th iteration");
    auto* chains_opt = fit->add_option("--chains", mcmc.chains, "Number of chains");
    auto* seed_opt = fit->add_option("--seed", mcmc.seed, "Base seed; chain c uses stream c");
    fit->add_option("--level", fit_level, "Credible level for the summary");
    fit->add_option("--out-dir", fit_out, "Output directory");

    auto* summ = app.add_subcommand("summarize", "Pool chain files into a summary");
    std::vector<std::string> chain_paths;
    double summ_level = 0.95;
    bool relabel = false;
    std::string trace_out;
    summ->add_option("--chains", chain_paths, "Chain CSV files")->required()->expected(-1);
    summ->add_option("--level", summ_level, "Credible level");
    summ->add_flag("--relabel", relabel, "Print relabeled class parameter table");
    summ->add_option("--trace-out", trace_out, "Write N and class-proportion traces here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) {
            return cmd_simulate(args, sim_config, paper_sim, replicates, sim_seed, sim_out);
        }
        if (fit->parsed()) {
            nlcmcr::McmcConfig cfg;
            if (!fit_config.empty()) apply_fit_config_file(fit_config, cfg);
            if (*k_opt) cfg.k_star = mcmc.k_star;
            if (*l_opt) cfg.l_star = mcmc.l_star;
            if (*it_opt) cfg.iterations = mcmc.iterations;
            if (*burn_opt) cfg.burn_in = mcmc.burn_in;
            if (*thin_opt) cfg.thinning = mcmc.thinning;
            if (*chains_opt) cfg.chains = mcmc.chains;
            if (*seed_opt) cfg.seed = mcmc.seed;
            return cmd_fit(args, model, data_path, cfg, fit_level, fit_out);
        }
        return cmd_summarize(chain_paths, summ_level, relabel, trace_out);
    } catch (const nlcmcr::degeneracy_error& e) {
        std::cerr << "degeneracy: " << e.what() << "\n";
        return 4;
    } catch (const nlcmcr::parameter_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const nlcmcr::parse_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const nlcmcr::validation_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
