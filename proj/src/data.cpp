#include "nlcmcr/data.hpp"

#include "nlcmcr/pattern_data.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "nlcmcr/errors.hpp"

namespace nlcmcr {

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
}

// Skips blank lines and '#' comment lines (used for the version header).
bool next_content_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        return true;
    }
    return false;
}

}  // namespace

CapturePattern::CapturePattern(std::uint32_t bits, int size) : bits_(bits), size_(size) {
    if (size < 0 || size > 32) throw validation_error("capture pattern length out of range");
    if (size < 32 && (bits >> size) != 0) {
        throw validation_error("capture pattern has bits beyond its declared length");
    }
}

CapturePattern CapturePattern::from_string(const std::string& text) {
    if (text.empty() || text.size() > 32) {
        throw parse_error("capture pattern string must have 1..32 characters");
    }
    std::uint32_t bits = 0;
    for (std::size_t s = 0; s < text.size(); ++s) {
        if (text[s] == '1') {
            bits |= 1u << s;
        } else if (text[s] != '0') {
            throw parse_error("capture pattern string must contain only 0/1: " + text);
        }
    }
    return CapturePattern(bits, static_cast<int>(text.size()));
}

int CapturePattern::capture_count() const {
    int c = 0;
    for (int s = 0; s < size_; ++s) c += captured(s);
    return c;
}

std::string CapturePattern::to_string() const {
    std::string out(static_cast<std::size_t>(size_), '0');
    for (int s = 0; s < size_; ++s) {
        if (captured(s)) out[static_cast<std::size_t>(s)] = '1';
    }
    return out;
}

long long GroupedDataset::n() const {
    long long total = 0;
    for (const auto& g : groups) total += static_cast<long long>(g.records.size());
    return total;
}

void GroupedDataset::validate() const {
    if (S < 2) throw validation_error("dataset must declare at least two lists");
    if (groups.empty()) throw validation_error("dataset must be nonempty");
    std::set<std::string> keys;
    for (const auto& g : groups) {
        if (!keys.insert(g.key).second) {
            throw validation_error("duplicate group key: " + g.key);
        }
        if (g.records.empty()) throw validation_error("empty group: " + g.key);
        for (const auto& r : g.records) {
            if (r.size() != S) throw validation_error("record length differs from list count");
            if (!r.any()) {
                throw validation_error("all-zero capture pattern in group " + g.key);
            }
        }
    }
}

long long PatternCountTable::n() const {
    long long total = 0;
    for (const auto& [pattern, count] : entries) total += count;
    return total;
}

void PatternCountTable::validate() const {
    if (S < 2) throw validation_error("pattern table must declare at least two lists");
    for (const auto& [pattern, count] : entries) {
        if (pattern.size() != S) {
            throw validation_error("pattern length differs from declared list count");
        }
        if (!pattern.any()) throw validation_error("pattern table contains the all-zero pattern");
        if (count < 0) throw validation_error("negative pattern count");
    }
}

GroupedDataset parse_records(std::istream& in, const ParseOptions& opts) {
    std::string line;
    if (!next_content_line(in, line)) throw parse_error("record input has no header");
    const auto header = split(line, opts.delimiter);

    std::vector<int> list_cols;
    int group_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string name = trim(header[c]);
        if (name.rfind("list_", 0) == 0) {
            list_cols.push_back(static_cast<int>(c));
        } else if (name == "group") {
            if (group_col >= 0) throw parse_error("duplicate group column");
            group_col = static_cast<int>(c);
        } else {
            throw parse_error("unrecognized column: " + name);
        }
    }
    const int S = static_cast<int>(list_cols.size());
    if (S < 2) throw validation_error("unsupported dataset: fewer than two list columns");
    if (S > 32) throw validation_error("unsupported dataset: more than 32 list columns");

    GroupedDataset ds;
    ds.S = S;
    std::map<std::string, std::size_t> group_index;  // key -> slot, first-seen order
    long long row = 1;
    while (next_content_line(in, line)) {
        ++row;
        const auto fields = split(line, opts.delimiter);
        if (fields.size() != header.size()) {
            throw parse_error("row " + std::to_string(row) + ": wrong field count");
        }
        std::uint32_t bits = 0;
        for (int s = 0; s < S; ++s) {
            const std::string v = trim(fields[static_cast<std::size_t>(list_cols[s])]);
            if (v == "1") {
                bits |= 1u << s;
            } else if (v != "0") {
                throw parse_error("row " + std::to_string(row) + ": non-binary list value '" +
                                  v + "'");
            }
        }
        if (bits == 0) {
            throw validation_error("row " + std::to_string(row) +
                                   ": all-zero capture pattern (unobserved records cannot "
                                   "appear in input)");
        }
        const std::string key =
            group_col >= 0 ? trim(fields[static_cast<std::size_t>(group_col)]) : "_all";
        auto [it, inserted] = group_index.try_emplace(key, ds.groups.size());
        if (inserted) ds.groups.push_back(RecordGroup{key, {}});
        ds.groups[it->second].records.emplace_back(bits, S);
    }
    ds.validate();
    return ds;
}

GroupedDataset parse_records_text(const std::string& text, const ParseOptions& opts) {
    std::istringstream in(text);
    return parse_records(in, opts);
}

PatternCountTable parse_pattern_counts(std::istream& in, const ParseOptions& opts) {
    std::string line;
    if (!next_content_line(in, line)) throw parse_error("pattern input has no header");
    auto header = split(line, opts.delimiter);
    for (auto& h : header) h = trim(h);
    if (header.size() != 2 || header[0] != "pattern" || header[1] != "count") {
        throw parse_error("aggregated input must have header pattern,count");
    }

    PatternCountTable table;
    long long row = 1;
    while (next_content_line(in, line)) {
        ++row;
        const auto fields = split(line, opts.delimiter);
        if (fields.size() != 2) {
            throw parse_error("row " + std::to_string(row) + ": wrong field count");
        }
        const CapturePattern pattern = CapturePattern::from_string(trim(fields[0]));
        if (table.S == 0) table.S = pattern.size();
        long long count = 0;
        try {
            count = std::stoll(trim(fields[1]));
        } catch (const std::exception&) {
            throw parse_error("row " + std::to_string(row) + ": bad count");
        }
        if (count < 0) throw parse_error("row " + std::to_string(row) + ": negative count");
        if (!pattern.any()) {
            throw validation_error("row " + std::to_string(row) + ": all-zero pattern");
        }
        table.entries[pattern] += count;
    }
    if (table.S < 2) throw validation_error("unsupported dataset: fewer than two lists");
    table.validate();
    return table;
}

PatternCountTable parse_pattern_counts_text(const std::string& text, const ParseOptions& opts) {
    std::istringstream in(text);
    return parse_pattern_counts(in, opts);
}

PatternCountTable aggregate_patterns(const GroupedDataset& ds) {
    ds.validate();
    PatternCountTable table;
    table.S = ds.S;
    for (const auto& g : ds.groups) {
        for (const auto& r : g.records) ++table.entries[r];
    }
    return table;
}

GroupedDataset expand_counts(const PatternCountTable& table, const std::string& group_key) {
    table.validate();
    if (table.n() == 0) throw validation_error("dataset must be nonempty");
    GroupedDataset ds;
    ds.S = table.S;
    ds.groups.push_back(RecordGroup{group_key, {}});
    auto& records = ds.groups[0].records;
    for (const auto& [pattern, count] : table.entries) {
        for (long long i = 0; i < count; ++i) records.push_back(pattern);
    }
    return ds;
}

void write_records_csv(std::ostream& out, const GroupedDataset& ds, char delimiter) {
    out << "# nlcmcr-records v1\n";
    for (int s = 1; s <= ds.S; ++s) out << "list_" << s << delimiter;
    out << "group\n";
    for (const auto& g : ds.groups) {
        for (const auto& r : g.records) {
            for (int s = 0; s < ds.S; ++s) out << (r.captured(s) ? '1' : '0') << delimiter;
            out << g.key << "\n";
        }
    }
}

PatternData PatternData::from_dataset(const GroupedDataset& ds) {
    PatternData out;
    out.S = ds.S;
    out.groups.reserve(ds.groups.size());
    for (const auto& g : ds.groups) {
        std::map<std::uint32_t, long long> counts;
        for (const auto& r : g.records) ++counts[r.bits()];
        GroupPatterns gp;
        gp.key = g.key;
        for (const auto& [bits, count] : counts) {
            gp.pattern.push_back(bits);
            gp.count.push_back(count);
            gp.n += count;
        }
        out.n += gp.n;
        out.groups.push_back(std::move(gp));
    }
    return out;
}

PatternData PatternData::from_table(const PatternCountTable& table) {
    PatternData out;
    out.S = table.S;
    GroupPatterns gp;
    gp.key = "_all";
    for (const auto& [pattern, count] : table.entries) {
        if (count == 0) continue;
        gp.pattern.push_back(pattern.bits());
        gp.count.push_back(count);
        gp.n += count;
    }
    out.n = gp.n;
    out.groups.push_back(std::move(gp));
    return out;
}

PatternData PatternData::pooled() const {
    std::map<std::uint32_t, long long> counts;
    for (const auto& g : groups) {
        for (std::size_t i = 0; i < g.pattern.size(); ++i) counts[g.pattern[i]] += g.count[i];
    }
    PatternData out;
    out.S = S;
    GroupPatterns gp;
    gp.key = "_all";
    for (const auto& [bits, count] : counts) {
        gp.pattern.push_back(bits);
        gp.count.push_back(count);
        gp.n += count;
    }
    out.n = gp.n;
    out.groups.push_back(std::move(gp));
    return out;
}

void write_pattern_counts_csv(std::ostream& out, const PatternCountTable& table,
                              char delimiter) {
    out << "# nlcmcr-pattern-counts v1\n";
    out << "pattern" << delimiter << "count\n";
    for (const auto& [pattern, count] : table.entries) {
        out << pattern.to_string() << delimiter << count << "\n";
    }
}

}  // namespace nlcmcr
