#include "loadsr_app/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "loadsr/error.hpp"

namespace loadsr::app {

namespace {

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected)
{
    throw Error(ErrorKind::InvalidConfig, fmt::format("config key '{}': '{}' is not {}", key, value, expected));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text, const char* expected)
{
    T value {};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc {} || ptr != last) {
        bad_value(key, text, expected);
    }
    return value;
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

} // namespace

KeyValueConfig KeyValueConfig::from_string(const std::string& text)
{
    KeyValueConfig kv;
    std::stringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::InvalidConfig, fmt::format("config line {}: expected 'key = value'", line_no));
        }
        auto key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw Error(ErrorKind::InvalidConfig, fmt::format("config line {}: empty key", line_no));
        }
        kv.values_[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValueConfig KeyValueConfig::from_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::InvalidConfig, fmt::format("cannot open config file '{}'", path.string()));
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

void KeyValueConfig::merge(const KeyValueConfig& other)
{
    for (const auto& [k, v] : other.values_) {
        values_[k] = v;
    }
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const
{
    auto it = values_.find(key);
    if (it == values_.end()) {
        return std::nullopt;
    }
    consumed_.insert(key);
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const
{
    return get(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const
{
    auto v = get(key);
    return v ? parse_number<double>(key, *v, "a number") : fallback;
}

std::size_t KeyValueConfig::get_size(const std::string& key, std::size_t fallback) const
{
    auto v = get(key);
    return v ? parse_number<std::size_t>(key, *v, "a non-negative integer") : fallback;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const
{
    auto v = get(key);
    return v ? parse_number<std::uint64_t>(key, *v, "a non-negative integer") : fallback;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const
{
    auto v = get(key);
    if (!v) {
        return fallback;
    }
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") {
        return true;
    }
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") {
        return false;
    }
    bad_value(key, *v, "a boolean");
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key, const std::vector<std::string>& fallback) const
{
    auto v = get(key);
    return v ? split_list(*v) : fallback;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key, const std::vector<double>& fallback) const
{
    auto v = get(key);
    if (!v) {
        return fallback;
    }
    std::vector<double> out;
    for (const auto& item : split_list(*v)) {
        out.push_back(parse_number<double>(key, item, "a list of numbers"));
    }
    return out;
}

std::vector<std::size_t> KeyValueConfig::get_size_list(const std::string& key,
                                                       const std::vector<std::size_t>& fallback) const
{
    auto v = get(key);
    if (!v) {
        return fallback;
    }
    std::vector<std::size_t> out;
    for (const auto& item : split_list(*v)) {
        out.push_back(parse_number<std::size_t>(key, item, "a list of non-negative integers"));
    }
    return out;
}

void KeyValueConfig::check_consumed() const
{
    for (const auto& [k, v] : values_) {
        if (!consumed_.contains(k)) {
            throw Error(ErrorKind::InvalidConfig, fmt::format("unknown config key '{}'", k));
        }
    }
}

SearchConfig read_search_config(const KeyValueConfig& kv)
{
    SearchConfig c;
    c.depth = kv.get_size("depth", c.depth);
    c.epsilon = kv.get_double("epsilon", c.epsilon);
    auto policy = kv.get_string("policy", to_string(c.policy));
    if (policy == "risk_seeking" || policy == "risk") {
        c.policy = PolicyMode::RiskSeeking;
    } else if (policy == "standard") {
        c.policy = PolicyMode::Standard;
    } else {
        throw Error(ErrorKind::InvalidConfig, fmt::format("policy must be 'risk_seeking' or 'standard', got '{}'", policy));
    }
    auto placement = kv.get_string("update_placement", to_string(c.placement));
    if (placement == "per_batch") {
        c.placement = UpdatePlacement::PerBatch;
    } else if (placement == "per_sample") {
        c.placement = UpdatePlacement::PerSample;
    } else {
        throw Error(ErrorKind::InvalidConfig,
                    fmt::format("update_placement must be 'per_batch' or 'per_sample', got '{}'", placement));
    }
    c.actor_iterations = kv.get_size("actor_iterations", c.actor_iterations);
    c.critic_iterations = kv.get_size("critic_iterations", c.critic_iterations);
    c.finetune_iterations = kv.get_size("finetune_iterations", c.finetune_iterations);
    c.batch_size = kv.get_size("batch_size", c.batch_size);
    c.pool_capacity = kv.get_size("pool_capacity", c.pool_capacity);
    c.actor_learning_rate = kv.get_double("actor_learning_rate", c.actor_learning_rate);
    c.critic_learning_rate = kv.get_double("critic_learning_rate", c.critic_learning_rate);
    c.entropy_coef = kv.get_double("entropy_coef", c.entropy_coef);
    c.seed = kv.get_u64("seed", c.seed);
    c.operators = kv.get_list("operators", c.operators);
    c.guard_epsilon = kv.get_double("guard_epsilon", c.guard_epsilon);
    c.threads = kv.get_size("threads", c.threads);
    validate(c);
    return c;
}

TrajectoryConfig read_trajectory_config(const KeyValueConfig& kv)
{
    TrajectoryConfig c;
    auto kind = kv.get_string("kind", "zip");
    if (kind == "zip") {
        c.kind = GeneratorKind::Zip;
    } else if (kind == "erl") {
        c.kind = GeneratorKind::Erl;
    } else {
        throw Error(ErrorKind::InvalidConfig, fmt::format("kind must be 'zip' or 'erl', got '{}'", kind));
    }
    c.duration = kv.get_double("duration", c.duration);
    c.dt = kv.get_double("dt", c.dt);
    c.fault_time = kv.get_double("fault_time", c.fault_time);
    c.dip = kv.get_double("dip", c.dip);
    c.recovery_tau = kv.get_double("recovery_tau", c.recovery_tau);
    c.noise_sigma = kv.get_double("noise_sigma", c.noise_sigma);
    c.seed = kv.get_u64("seed", c.seed);
    c.p0 = kv.get_double("p0", c.p0);
    c.a_z = kv.get_double("a_z", c.a_z);
    c.a_i = kv.get_double("a_i", c.a_i);
    c.a_p = kv.get_double("a_p", c.a_p);
    c.alpha_s = kv.get_double("alpha_s", c.alpha_s);
    c.alpha_t = kv.get_double("alpha_t", c.alpha_t);
    c.t_p = kv.get_double("t_p", c.t_p);
    validate(c);
    return c;
}

DataOptions read_data_options(const KeyValueConfig& kv)
{
    DataOptions o;
    o.features = kv.get_list("features", o.features);
    o.target = kv.get_string("target", o.target);
    o.time_column = kv.get_string("time_column", o.time_column);
    o.lags = kv.get_size_list("lags", o.lags);
    o.lag_targets = kv.get_list("lag_targets", o.lag_targets);
    o.train_fraction = kv.get_double("train_fraction", o.train_fraction);
    auto mode = kv.get_string("split", "chronological");
    if (mode == "chronological") {
        o.split = SplitMode::Chronological;
    } else if (mode == "shuffled") {
        o.split = SplitMode::Shuffled;
    } else {
        throw Error(ErrorKind::InvalidConfig, fmt::format("split must be 'chronological' or 'shuffled', got '{}'", mode));
    }
    o.normalize = kv.get_bool("normalize", o.normalize);
    return o;
}

} // namespace loadsr::app
