#include "loadsr/reward_pool.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "loadsr/error.hpp"

namespace loadsr {

double reward(double rmse)
{
    if (!(rmse >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument, fmt::format("rmse must be non-negative, got {}", rmse));
    }
    return 1.0 / (1.0 + rmse);
}

double empirical_quantile(std::span<const double> rewards, double epsilon)
{
    if (rewards.empty()) {
        throw Error(ErrorKind::InvalidArgument, "empirical quantile of an empty batch");
    }
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw Error(ErrorKind::InvalidConfig, fmt::format("epsilon must lie in (0, 1], got {}", epsilon));
    }
    const auto n = rewards.size();
    auto k = static_cast<std::size_t>(std::ceil(epsilon * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, 1, n);
    std::vector<double> sorted(rewards.begin(), rewards.end());
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end(),
                     std::greater<>());
    return sorted[k - 1];
}

CandidatePool::CandidatePool(std::size_t capacity) : capacity_(capacity)
{
    if (capacity_ == 0) {
        throw Error(ErrorKind::InvalidConfig, "candidate pool capacity must be at least 1");
    }
    entries_.reserve(capacity_ + 1);
}

bool CandidatePool::insert(Candidate candidate)
{
    auto same = std::find_if(entries_.begin(), entries_.end(),
                             [&](const Candidate& e) { return e.assignment == candidate.assignment; });
    if (same != entries_.end()) {
        if (candidate.reward <= same->reward) {
            return false;
        }
        same->reward = candidate.reward;
        same->coefficients = std::move(candidate.coefficients);
        same->iteration = candidate.iteration;
        restore_order();
        return true;
    }
    if (entries_.size() >= capacity_ && candidate.reward <= entries_.back().reward) {
        return false;
    }
    entries_.push_back(std::move(candidate));
    restore_order();
    if (entries_.size() > capacity_) {
        entries_.pop_back();
    }
    return true;
}

void CandidatePool::restore_order()
{
    std::stable_sort(entries_.begin(), entries_.end(), [](const Candidate& a, const Candidate& b) {
        if (a.reward != b.reward) {
            return a.reward > b.reward;
        }
        return a.iteration < b.iteration;
    });
}

const Candidate& CandidatePool::best() const
{
    if (entries_.empty()) {
        throw Error(ErrorKind::EmptyPool, "candidate pool is empty");
    }
    return entries_.front();
}

} // namespace loadsr
