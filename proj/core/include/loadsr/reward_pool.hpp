#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "loadsr/expr_tree.hpp"

namespace loadsr {

// 1 / (1 + rmse), in (0, 1].
double reward(double rmse);

// k-th best reward with k = ceil(epsilon * N); samples at or above it form the top-epsilon fraction.
double empirical_quantile(std::span<const double> rewards, double epsilon);

struct Candidate {
    OperatorAssignment assignment;
    std::vector<double> coefficients; // coarse-tuned snapshot
    double reward = 0.0;
    std::size_t iteration = 0;        // discovery iteration; earlier wins ties
};

// Top-C store, sorted by reward descending, deduplicated by assignment.
class CandidatePool {
public:
    explicit CandidatePool(std::size_t capacity);

    // Returns true when the pool changed.
    bool insert(Candidate candidate);

    [[nodiscard]] const Candidate& best() const;
    [[nodiscard]] std::span<const Candidate> entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }

private:
    void restore_order();

    std::size_t capacity_;
    std::vector<Candidate> entries_;
};

} // namespace loadsr
