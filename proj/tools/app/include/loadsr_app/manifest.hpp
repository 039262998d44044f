#pragma once

#include <filesystem>

#include <json.hpp>

#include "loadsr/baselines.hpp"
#include "loadsr/data.hpp"
#include "loadsr/search.hpp"

namespace loadsr::app {

using nlohmann::json;

// Non-finite values serialize as null.
json number_or_null(double v);

json to_json(const SearchConfig& config);
json to_json(const TrajectoryConfig& config);
json to_json(const SearchResult& result);
json to_json(const BaselineFit& fit);
json dataset_json(const Dataset& full, std::size_t train_rows, std::size_t test_rows);

// Copy without the "timings" object; two runs with the same config and seed agree on the rest.
json without_timings(const json& manifest);

void write_json(const std::filesystem::path& path, const json& value);
json read_json(const std::filesystem::path& path);

} // namespace loadsr::app
