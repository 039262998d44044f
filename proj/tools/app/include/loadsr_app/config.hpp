#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "loadsr/data.hpp"
#include "loadsr/search.hpp"

namespace loadsr::app {

// Flat `key = value` configuration with `#` comments. Values given later (e.g. command-line
// overrides) replace earlier ones. Every key must be consumed by some reader, otherwise
// check_consumed() reports it as unknown.
class KeyValueConfig {
public:
    static KeyValueConfig from_file(const std::filesystem::path& path);
    static KeyValueConfig from_string(const std::string& text);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    void merge(const KeyValueConfig& other);

    [[nodiscard]] bool has(const std::string& key) const { return values_.contains(key); }
    [[nodiscard]] std::optional<std::string> get(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;
    std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::size_t> get_size_list(const std::string& key, const std::vector<std::size_t>& fallback) const;

    void check_consumed() const;
    [[nodiscard]] const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> consumed_;
};

SearchConfig read_search_config(const KeyValueConfig& kv);
TrajectoryConfig read_trajectory_config(const KeyValueConfig& kv);

struct DataOptions {
    std::vector<std::string> features { "V" };
    std::string target = "P";
    std::string time_column;
    std::vector<std::size_t> lags;
    std::vector<std::string> lag_targets;
    double train_fraction = 0.8;
    SplitMode split = SplitMode::Chronological;
    bool normalize = false;
};

DataOptions read_data_options(const KeyValueConfig& kv);

// Seed of the shuffled train/test split for a run seed.
inline std::uint64_t split_seed(std::uint64_t seed) { return derive_seed(seed, { 0x73706c6974ULL }); }

} // namespace loadsr::app
