#include "loadsr/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/core.h>
#include <fmt/os.h>

#include "loadsr/error.hpp"

namespace loadsr {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '"')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

double parse_field(std::string_view field)
{
    double v = std::numeric_limits<double>::quiet_NaN();
    if (field.empty()) {
        return v;
    }
    const char* first = field.data();
    if (*first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), v);
    if (ec != std::errc {} || ptr != field.data() + field.size()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return v;
}

Dataset with_rows_like(const Dataset& ds)
{
    Dataset out;
    out.feature_names = ds.feature_names;
    out.target_name = ds.target_name;
    out.dt = ds.dt;
    out.normalization = ds.normalization;
    out.dropped_rows = ds.dropped_rows;
    return out;
}

} // namespace

Dataset load_csv(const std::filesystem::path& path, std::span<const std::string> features, const std::string& target,
                 const std::string& time_column)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Ingestion, fmt::format("cannot open '{}'", path.string()));
    }
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) {
        throw Error(ErrorKind::Ingestion, fmt::format("'{}' is empty or has no header row", path.string()));
    }
    if (line.size() >= 3 && std::memcmp(line.data(), "\xEF\xBB\xBF", 3) == 0) {
        line.erase(0, 3);
    }
    auto header = split_fields(line);
    auto column_of = [&](const std::string& name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw Error(ErrorKind::Ingestion, fmt::format("column '{}' not found in '{}'", name, path.string()));
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    if (features.empty()) {
        throw Error(ErrorKind::Ingestion, "at least one feature column is required");
    }

    std::vector<std::size_t> feature_idx;
    for (const auto& f : features) {
        feature_idx.push_back(column_of(f));
    }
    const std::size_t target_idx = column_of(target);
    std::optional<std::size_t> time_idx;
    if (!time_column.empty()) {
        time_idx = column_of(time_column);
    } else if (std::find(header.begin(), header.end(), "t") != header.end() && target != "t"
               && std::find(features.begin(), features.end(), "t") == features.end()) {
        time_idx = column_of("t");
    }

    Dataset ds;
    ds.feature_names.assign(features.begin(), features.end());
    ds.target_name = target;
    std::vector<double> row(feature_idx.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_fields(line);
        auto get = [&](std::size_t idx) { return idx < fields.size() ? parse_field(fields[idx]) : std::nan(""); };
        bool finite = true;
        for (std::size_t j = 0; j < feature_idx.size(); ++j) {
            row[j] = get(feature_idx[j]);
            finite = finite && std::isfinite(row[j]);
        }
        double yv = get(target_idx);
        double tv = time_idx ? get(*time_idx) : 0.0;
        finite = finite && std::isfinite(yv) && std::isfinite(tv);
        if (!finite) {
            ++ds.dropped_rows;
            continue;
        }
        ds.X.append_row(row);
        ds.y.push_back(yv);
        if (time_idx) {
            ds.time.push_back(tv);
        }
    }
    if (ds.y.empty()) {
        throw Error(ErrorKind::Ingestion, fmt::format("'{}' has no valid data rows", path.string()));
    }
    if (ds.time.size() >= 2) {
        ds.dt = ds.time[1] - ds.time[0];
    }
    return ds;
}

void write_csv(const std::filesystem::path& path, std::span<const std::string> header,
               std::span<const std::vector<double>> columns)
{
    if (header.size() != columns.size()) {
        throw Error(ErrorKind::InvalidArgument, "csv header and column count differ");
    }
    std::string text;
    for (std::size_t j = 0; j < header.size(); ++j) {
        text += (j ? "," : "") + header[j];
    }
    text += '\n';
    const std::size_t n = columns.empty() ? 0 : columns.front().size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) {
            if (j > 0) {
                text += ',';
            }
            text += fmt::format("{}", columns[j][i]);
        }
        text += '\n';
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::Ingestion, fmt::format("cannot write '{}'", path.string()));
    }
    out << text;
}

Dataset take_rows(const Dataset& ds, std::span<const std::size_t> rows)
{
    Dataset out = with_rows_like(ds);
    out.X = Matrix(0, 0);
    for (auto r : rows) {
        out.X.append_row(ds.X.row(r));
        out.y.push_back(ds.y[r]);
        if (!ds.time.empty()) {
            out.time.push_back(ds.time[r]);
        }
    }
    if (rows.empty()) {
        out.X = Matrix(0, ds.cols());
    }
    return out;
}

Dataset add_lags(const Dataset& ds, std::span<const std::size_t> lags, std::span<const std::string> lag_targets)
{
    if (lags.empty() || lag_targets.empty()) {
        return ds;
    }
    const std::size_t n = ds.rows();
    const std::size_t max_lag = *std::max_element(lags.begin(), lags.end());
    if (*std::min_element(lags.begin(), lags.end()) == 0) {
        throw Error(ErrorKind::InvalidLag, "lags must be positive");
    }
    if (max_lag >= n) {
        throw Error(ErrorKind::InvalidLag, fmt::format("lag {} needs more than {} rows", max_lag, n));
    }

    std::vector<std::vector<double>> sources;
    for (const auto& name : lag_targets) {
        if (name == ds.target_name) {
            sources.push_back(ds.y);
            continue;
        }
        auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(), name);
        if (it == ds.feature_names.end()) {
            throw Error(ErrorKind::InvalidLag, fmt::format("lag target '{}' is not a dataset column", name));
        }
        sources.push_back(ds.X.column(static_cast<std::size_t>(it - ds.feature_names.begin())));
    }

    Dataset out = with_rows_like(ds);
    for (std::size_t s = 0; s < lag_targets.size(); ++s) {
        for (auto k : lags) {
            out.feature_names.push_back(fmt::format("{}_lag{}", lag_targets[s], k));
        }
    }
    std::vector<double> row;
    for (std::size_t i = max_lag; i < n; ++i) {
        auto base = ds.X.row(i);
        row.assign(base.begin(), base.end());
        for (const auto& src : sources) {
            for (auto k : lags) {
                row.push_back(src[i - k]);
            }
        }
        out.X.append_row(row);
        out.y.push_back(ds.y[i]);
        if (!ds.time.empty()) {
            out.time.push_back(ds.time[i]);
        }
    }
    return out;
}

Dataset apply_normalization(const Dataset& ds, const Normalization& norm)
{
    if (norm.mean.size() != ds.cols() || norm.scale.size() != ds.cols()) {
        throw Error(ErrorKind::InvalidArgument, "normalization constants do not match the column count");
    }
    Dataset out = ds;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        for (std::size_t j = 0; j < ds.cols(); ++j) {
            out.X(i, j) = (ds.X(i, j) - norm.mean[j]) / norm.scale[j];
        }
    }
    out.normalization = norm;
    return out;
}

Dataset standardize(const Dataset& ds)
{
    Normalization norm;
    const auto n = static_cast<double>(ds.rows());
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        auto col = ds.X.column(j);
        double mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
        double var = 0.0;
        for (double v : col) {
            var += (v - mean) * (v - mean);
        }
        double scale = std::sqrt(var / n);
        norm.mean.push_back(mean);
        norm.scale.push_back(scale > 0.0 ? scale : 1.0);
    }
    return apply_normalization(ds, norm);
}

SplitOrder split_order(std::size_t n, double train_fraction, SplitMode mode, std::uint64_t seed)
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorKind::InvalidConfig, fmt::format("train fraction must lie in (0, 1), got {}", train_fraction));
    }
    auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));
    if (n_train == 0 || n_train == n) {
        throw Error(ErrorKind::InvalidInput, fmt::format("{} rows cannot be split at fraction {}", n, train_fraction));
    }
    SplitOrder out;
    out.order.resize(n);
    out.train_rows = n_train;
    std::iota(out.order.begin(), out.order.end(), std::size_t { 0 });
    if (mode == SplitMode::Shuffled) {
        Rng rng(seed);
        for (std::size_t i = n - 1; i > 0; --i) {
            auto j = static_cast<std::size_t>(rng() % (i + 1));
            std::swap(out.order[i], out.order[j]);
        }
    }
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, SplitMode mode, std::uint64_t seed)
{
    auto so = split_order(ds.rows(), train_fraction, mode, seed);
    std::span<const std::size_t> all(so.order);
    return { take_rows(ds, all.first(so.train_rows)), take_rows(ds, all.subspan(so.train_rows)) };
}

std::uint64_t fingerprint(const Dataset& ds)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    std::uint64_t shape[2] = { ds.rows(), ds.cols() };
    feed(shape, sizeof(shape));
    feed(ds.X.data().data(), ds.X.data().size() * sizeof(double));
    feed(ds.y.data(), ds.y.size() * sizeof(double));
    return h;
}

// ---------------------------------------------------------------------------
// Generators

void validate(const TrajectoryConfig& c)
{
    auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); };
    if (!(c.duration > 0.0)) fail("duration must be positive");
    if (!(c.dt > 0.0 && c.dt < c.duration)) fail("dt must be positive and shorter than the duration");
    if (!(c.dip > 0.0 && c.dip < 1.0)) fail("dip must satisfy 0 < dip < 1");
    if (!(c.recovery_tau > 0.0)) fail("recovery_tau must be positive");
    if (!(c.noise_sigma >= 0.0)) fail("noise_sigma must be non-negative");
    if (!std::isfinite(c.fault_time)) fail("fault_time must be finite");
    if (!std::isfinite(c.p0)) fail("p0 must be finite");
    if (c.kind == GeneratorKind::Zip) {
        double sum = c.a_z + c.a_i + c.a_p;
        if (std::abs(sum - 1.0) > 1e-9) {
            fail(fmt::format("ZIP shares must satisfy a_z + a_i + a_p = 1 (got {})", sum));
        }
    } else {
        if (!(c.t_p > 0.0)) fail("t_p must be positive");
        if (!(c.dt < c.t_p / 10.0)) fail(fmt::format("ERL needs dt < t_p / 10 for a stable explicit scheme (dt={}, t_p={})", c.dt, c.t_p));
    }
}

VoltageTrajectory gen_voltage(const TrajectoryConfig& c, Rng& rng)
{
    validate(c);
    const auto n = static_cast<std::size_t>(std::floor(c.duration / c.dt + 1e-9)) + 1;
    VoltageTrajectory out;
    out.time.resize(n);
    out.voltage.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        double t = static_cast<double>(k) * c.dt;
        double v = t < c.fault_time ? 1.0 : 1.0 - c.dip * std::exp(-(t - c.fault_time) / c.recovery_tau);
        if (c.noise_sigma > 0.0) {
            v += c.noise_sigma * gaussian(rng);
        }
        out.time[k] = t;
        out.voltage[k] = std::clamp(v, 0.01, 1.5);
    }
    return out;
}

namespace {

Dataset trajectory_dataset(const VoltageTrajectory& traj, std::vector<double> power, double dt)
{
    Dataset ds;
    ds.feature_names = { "V" };
    ds.target_name = "P";
    ds.dt = dt;
    ds.time = traj.time;
    ds.X = Matrix(traj.voltage.size(), 1);
    for (std::size_t i = 0; i < traj.voltage.size(); ++i) {
        ds.X(i, 0) = traj.voltage[i];
    }
    ds.y = std::move(power);
    return ds;
}

} // namespace

Dataset gen_zip(const TrajectoryConfig& c, Rng& rng)
{
    if (c.kind != GeneratorKind::Zip) {
        throw Error(ErrorKind::InvalidConfig, "gen_zip needs a ZIP trajectory config");
    }
    auto traj = gen_voltage(c, rng);
    std::vector<double> p(traj.voltage.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        double v = traj.voltage[i];
        p[i] = c.p0 * (c.a_z * v * v + c.a_i * v + c.a_p);
        if (c.noise_sigma > 0.0) {
            p[i] += c.noise_sigma * gaussian(rng);
        }
    }
    return trajectory_dataset(traj, std::move(p), c.dt);
}

Dataset gen_erl(const TrajectoryConfig& c, Rng& rng)
{
    if (c.kind != GeneratorKind::Erl) {
        throw Error(ErrorKind::InvalidConfig, "gen_erl needs an ERL trajectory config");
    }
    auto traj = gen_voltage(c, rng);
    std::vector<double> p(traj.voltage.size());
    double x = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double v = traj.voltage[i];
        double vs = std::pow(v, c.alpha_s);
        double vt = std::pow(v, c.alpha_t);
        p[i] = x / c.t_p + c.p0 * vt;
        x += c.dt * (-x / c.t_p + c.p0 * (vs - vt));
    }
    if (c.noise_sigma > 0.0) {
        for (auto& pi : p) {
            pi += c.noise_sigma * gaussian(rng);
        }
    }
    return trajectory_dataset(traj, std::move(p), c.dt);
}

Dataset generate(const TrajectoryConfig& config)
{
    Rng rng(config.seed);
    return config.kind == GeneratorKind::Zip ? gen_zip(config, rng) : gen_erl(config, rng);
}

} // namespace loadsr
