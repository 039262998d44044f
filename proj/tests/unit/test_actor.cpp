#include <doctest.h>

#include <cmath>
#include <functional>
#include <numeric>

#include "loadsr/actor.hpp"
#include "loadsr/error.hpp"
#include "oracles/finite_diff.hpp"

using namespace loadsr;

namespace {

std::vector<ScoredAction> score(const std::vector<SampledAction>& batch, const std::function<double(const OperatorAssignment&)>& f)
{
    std::vector<ScoredAction> out;
    for (const auto& s : batch) {
        out.push_back({ s.action, f(s.action) });
    }
    return out;
}

} // namespace

TEST_SUITE("actor")
{
    TEST_CASE("fresh policy is uniform")
    {
        auto shape = TreeTemplate::build(1, 1);
        auto lib = default_library(1);
        auto policy = new_policy(shape, lib, 0.1);
        CHECK(policy.positions() == shape.size());
        for (double p : policy.probabilities(0)) {
            CHECK(p == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
        }
        CHECK(policy.log_prob({ 4, 0 }) == doctest::Approx(std::log(1.0 / 9.0) + std::log(1.0)).epsilon(1e-15));
        CHECK_THROWS_AS(Policy({ 3 }, 0.0), Error);
        CHECK_THROWS_AS(Policy({ 3 }, -1.0), Error);
        CHECK_FALSE(policy.baseline().has_value());
    }

    TEST_CASE("sampling is reproducible and saturates")
    {
        Policy policy({ 4, 3 }, 0.1);
        Rng a(5);
        Rng b(5);
        auto s1 = sample_batch(policy, 50, a);
        auto s2 = sample_batch(policy, 50, b);
        for (std::size_t i = 0; i < s1.size(); ++i) {
            CHECK(s1[i].action == s2[i].action);
        }

        std::vector<double> spike { 0.0, 1e9, 0.0, 0.0 };
        policy.set_logits(0, spike);
        Rng c(6);
        for (const auto& s : sample_batch(policy, 1000, c)) {
            CHECK(s.action[0] == 1);
        }
    }

    TEST_CASE("uniform sampling frequencies")
    {
        Policy policy({ 4 }, 0.1);
        Rng rng(17);
        std::vector<double> counts(4, 0.0);
        const int n = 100000;
        for (const auto& s : sample_batch(policy, n, rng)) {
            counts[static_cast<std::size_t>(s.action[0])] += 1.0;
        }
        for (double c : counts) {
            CHECK(std::abs(c / n - 0.25) <= 0.01);
        }
    }

    TEST_CASE("log-softmax gradient matches finite differences")
    {
        Rng rng(21);
        for (int trial = 0; trial < 100; ++trial) {
            std::size_t k = 2 + rng() % 8;
            Policy policy({ k }, 0.1);
            std::vector<double> z(k);
            for (auto& v : z) v = uniform(rng, -3.0, 3.0);
            policy.set_logits(0, z);
            int choice = static_cast<int>(rng() % k);
            auto analytic = policy.log_prob_gradient(0, choice);
            auto fd = oracle::numeric_gradient(
                [&](const std::vector<double>& v) {
                    Policy p({ k }, 0.1);
                    p.set_logits(0, v);
                    return p.log_prob({ choice });
                },
                z, 1e-6);
            for (std::size_t j = 0; j < k; ++j) {
                CHECK(std::abs(analytic[j] - fd[j]) <= 1e-5 * std::max(1.0, std::abs(analytic[j])));
            }
            auto p = policy.probabilities(0);
            CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    TEST_CASE("standard update direction")
    {
        Policy policy({ 3, 2 }, 0.5);
        policy.set_baseline(0.4);
        std::vector<ScoredAction> flat { { { 0, 1 }, 0.4 }, { { 2, 0 }, 0.4 }, { { 1, 1 }, 0.4 } };
        auto before = policy.all_logits();
        standard_update(policy, flat);
        CHECK(policy.all_logits() == before);

        Policy fresh({ 3, 2 }, 0.5);
        fresh.set_baseline(0.4);
        std::vector<ScoredAction> one_up { { { 0, 1 }, 0.9 }, { { 2, 0 }, 0.4 }, { { 1, 1 }, 0.4 } };
        double p_before = std::exp(fresh.log_prob({ 0, 1 }));
        standard_update(fresh, one_up);
        CHECK(std::exp(fresh.log_prob({ 0, 1 })) > p_before);
        CHECK(*fresh.baseline() == doctest::Approx(0.9 * 0.4 + 0.1 * (1.7 / 3.0)).epsilon(1e-15));

        Policy unset({ 3 }, 0.5);
        std::vector<ScoredAction> batch { { { 0 }, 0.2 }, { { 1 }, 0.4 } };
        standard_update(unset, batch);
        CHECK(*unset.baseline() == doctest::Approx(0.3).epsilon(1e-15));
        CHECK(unset.probabilities(0)[1] > unset.probabilities(0)[0]);
        CHECK_THROWS_AS(standard_update(unset, std::vector<ScoredAction> {}), Error);
    }

    TEST_CASE("risk-seeking weights")
    {
        // ascend with a unit step exposes the weights through the logit change at a K=8 position
        std::vector<ScoredAction> batch;
        for (int i = 0; i < 8; ++i) {
            batch.push_back({ { i }, 0.1 * (i + 1) });
        }
        Policy policy({ 8 }, 1.0);
        risk_seeking_update(policy, batch, 0.5);
        auto z = policy.logits(0);
        // uniform p = 1/8: dz_k = (w_k - sum(w)/8) / 8 with w = (R - 0.5) for R >= 0.5
        std::vector<double> w { 0, 0, 0, 0, 0, 0.1, 0.2, 0.3 };
        double sum_w = 0.6;
        for (std::size_t k = 0; k < 8; ++k) {
            CHECK(z[k] == doctest::Approx((w[k] - sum_w / 8.0) / 8.0).epsilon(1e-12));
        }
        // the sample at the threshold (0.5) passes the indicator with zero weight
        CHECK(z[4] == z[0]);

        CHECK_THROWS_AS(risk_seeking_update(policy, batch, 0.0), Error);
        CHECK_THROWS_AS(risk_seeking_update(policy, batch, 1.1), Error);
    }

    TEST_CASE("epsilon one equals standard update at the batch minimum")
    {
        Rng rng(31);
        for (int trial = 0; trial < 50; ++trial) {
            Policy a({ 5, 3, 4 }, 0.3, trial % 2 == 0 ? 0.0 : 0.01);
            std::vector<double> z0 { 0.1, -0.2, 0.3, 0.0, 1.0 };
            a.set_logits(0, z0);
            Policy b = a;
            auto batch = score(sample_batch(a, 16, rng), [&](const OperatorAssignment&) { return uniform(rng, 0.0, 1.0); });
            double lowest = batch[0].reward;
            for (const auto& s : batch) lowest = std::min(lowest, s.reward);
            risk_seeking_update(a, batch, 1.0);
            b.set_baseline(lowest);
            standard_update(b, batch);
            CHECK(a.all_logits() == b.all_logits());
        }
    }

    TEST_CASE("risk-seeking updates concentrate on a rewarded assignment")
    {
        auto shape = TreeTemplate::build(1, 1);
        auto lib = default_library(1);
        const OperatorAssignment target { 6, 0 };
        auto train = [&](double eps, std::uint64_t seed) {
            auto policy = new_policy(shape, lib, 0.1);
            Rng rng(seed);
            for (int it = 0; it < 500; ++it) {
                auto batch = score(sample_batch(policy, 32, rng),
                                   [&](const OperatorAssignment& a) { return a == target ? 1.0 : 0.1; });
                risk_seeking_update(policy, batch, eps);
            }
            return std::exp(policy.log_prob(target));
        };
        // once the target fills the top-eps share the threshold equals its reward and all weights
        // vanish, so the probability settles just above eps
        for (double eps : { 0.5, 0.75 }) {
            int above = 0;
            for (std::uint64_t seed = 0; seed < 10; ++seed) {
                double p = train(eps, seed);
                above += p > eps ? 1 : 0;
                CHECK(p < eps + 0.2);
            }
            CHECK(above >= 9);
        }
        int converged = 0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            converged += train(1.0, seed) > 0.9 ? 1 : 0;
        }
        CHECK(converged >= 9);
    }

    TEST_CASE("entropy bonus flattens a peaked policy")
    {
        Policy policy({ 4 }, 0.5, 0.5);
        std::vector<double> z { 2.0, 0.0, 0.0, 0.0 };
        policy.set_logits(0, z);
        double h0 = policy.entropy();
        std::vector<ScoredAction> batch { { { 0 }, 0.5 }, { { 1 }, 0.5 } };
        policy.set_baseline(0.5);
        standard_update(policy, batch);
        CHECK(policy.entropy() > h0);
    }
}
