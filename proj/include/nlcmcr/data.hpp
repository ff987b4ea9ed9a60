#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace nlcmcr {

// Which lists captured one record. List s (0-based) maps to bit s, so the
// display string "1000" (list 1 captured only) is bit 0 set. At most 32
// lists are supported, far beyond anything 2^S-pattern data can sustain.
class CapturePattern {
  public:
    CapturePattern() = default;
    CapturePattern(std::uint32_t bits, int size);

    // From a 0/1 display string, e.g. "1011".
    static CapturePattern from_string(const std::string& text);

    bool captured(int list) const { return (bits_ >> list) & 1u; }
    std::uint32_t bits() const { return bits_; }
    int size() const { return size_; }
    bool any() const { return bits_ != 0; }
    int capture_count() const;

    std::string to_string() const;

    auto operator<=>(const CapturePattern&) const = default;

  private:
    std::uint32_t bits_ = 0;
    int size_ = 0;
};

struct RecordGroup {
    std::string key;
    std::vector<CapturePattern> records;
};

// Observed multi-list records partitioned into top-level groups.
struct GroupedDataset {
    int S = 0;
    std::vector<RecordGroup> groups;
    std::string provenance;

    int J() const { return static_cast<int>(groups.size()); }
    long long n() const;
    void validate() const;
};

// Pooled pattern -> count table (the aggregate publication format).
struct PatternCountTable {
    int S = 0;
    std::map<CapturePattern, long long> entries;

    long long n() const;
    void validate() const;
};

struct ParseOptions {
    char delimiter = ',';
};

// Record-level input: header with list_1..list_S columns (0/1) and an
// optional group column. Rows without a group column land in group "_all".
GroupedDataset parse_records(std::istream& in, const ParseOptions& opts = {});
GroupedDataset parse_records_text(const std::string& text, const ParseOptions& opts = {});

// Aggregated input: header `pattern,count`.
PatternCountTable parse_pattern_counts(std::istream& in, const ParseOptions& opts = {});
PatternCountTable parse_pattern_counts_text(const std::string& text,
                                            const ParseOptions& opts = {});

PatternCountTable aggregate_patterns(const GroupedDataset& ds);
GroupedDataset expand_counts(const PatternCountTable& table, const std::string& group_key);

void write_records_csv(std::ostream& out, const GroupedDataset& ds, char delimiter = ',');
void write_pattern_counts_csv(std::ostream& out, const PatternCountTable& table,
                              char delimiter = ',');

}  // namespace nlcmcr
