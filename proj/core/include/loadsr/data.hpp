#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loadsr/matrix.hpp"
#include "loadsr/random.hpp"

namespace loadsr {

struct Normalization {
    std::vector<double> mean;
    std::vector<double> scale;
};

struct Dataset {
    Matrix X;                         // n x d
    std::vector<double> y;            // n
    std::vector<std::string> feature_names;
    std::string target_name;
    std::vector<double> time;         // empty unless the data is a time series
    double dt = 0.0;                  // sample step in seconds, 0 if unknown
    std::optional<Normalization> normalization;
    std::size_t dropped_rows = 0;     // non-finite rows removed at ingestion

    [[nodiscard]] std::size_t rows() const noexcept { return y.size(); }
    [[nodiscard]] std::size_t cols() const noexcept { return X.cols(); }
};

// Header-based column selection. Rows holding a non-finite value in any selected column are dropped.
// If `time_column` is empty and a column named "t" exists, it is used as the time axis.
Dataset load_csv(const std::filesystem::path& path, std::span<const std::string> features, const std::string& target,
                 const std::string& time_column = "");

void write_csv(const std::filesystem::path& path, std::span<const std::string> header,
               std::span<const std::vector<double>> columns);

// Appends `<col>_lag<k>` columns for every lag target and lag (targets outer, lags inner).
// The target column itself may be lagged. The first max(lags) rows are dropped.
Dataset add_lags(const Dataset& ds, std::span<const std::size_t> lags, std::span<const std::string> lag_targets);

// Per-column standardization; constants stored on the dataset.
Dataset standardize(const Dataset& ds);
Dataset apply_normalization(const Dataset& ds, const Normalization& norm);

enum class SplitMode { Chronological, Shuffled };

struct SplitOrder {
    std::vector<std::size_t> order; // first train_rows entries are the training rows
    std::size_t train_rows = 0;
};

// n_train = floor(fraction * n); Shuffled applies a Fisher-Yates permutation drawn from `seed`.
SplitOrder split_order(std::size_t n, double train_fraction, SplitMode mode, std::uint64_t seed);
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, SplitMode mode, std::uint64_t seed);

// Row subset in the given order.
Dataset take_rows(const Dataset& ds, std::span<const std::size_t> rows);

// Content hash over shape and values, for run manifests.
std::uint64_t fingerprint(const Dataset& ds);

// ---------------------------------------------------------------------------
// Synthetic dynamic-load generators

enum class GeneratorKind { Zip, Erl };

struct TrajectoryConfig {
    GeneratorKind kind = GeneratorKind::Zip;
    double duration = 10.0;      // s
    double dt = 0.01;            // s
    double fault_time = 3.5;     // s
    double dip = 0.3;            // pu
    double recovery_tau = 1.0;   // s, voltage recovery time constant
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    // ZIP
    double p0 = 1.0;
    double a_z = 0.4;
    double a_i = 0.3;
    double a_p = 0.3;
    // ERL
    double alpha_s = 1.0;
    double alpha_t = 2.0;
    double t_p = 1.0;            // s, load recovery time constant
};

// Throws InvalidConfig naming the violated invariant.
void validate(const TrajectoryConfig& config);

struct VoltageTrajectory {
    std::vector<double> time;
    std::vector<double> voltage;
};

VoltageTrajectory gen_voltage(const TrajectoryConfig& config, Rng& rng);

// X = [V], y = P. Noise on V (measured signal) and on P use the same sigma.
Dataset gen_zip(const TrajectoryConfig& config, Rng& rng);
Dataset gen_erl(const TrajectoryConfig& config, Rng& rng);
Dataset generate(const TrajectoryConfig& config);

} // namespace loadsr
