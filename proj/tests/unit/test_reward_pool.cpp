#include <doctest.h>

#include <cmath>

#include "loadsr/error.hpp"
#include "loadsr/random.hpp"
#include "loadsr/reward_pool.hpp"
#include "oracles/brute_force.hpp"

using namespace loadsr;

TEST_SUITE("reward_pool")
{
    TEST_CASE("reward law")
    {
        CHECK(reward(0.0) == 1.0);
        CHECK(reward(1.0) == 0.5);
        CHECK(reward(3.0) == 0.25);
        CHECK(reward(1e300) > 0.0);
        CHECK(reward(1e300) < 1e-299);
        CHECK_THROWS_AS(reward(-1.0), Error);
        CHECK_THROWS_AS(reward(std::nan("")), Error);
        Rng rng(1);
        for (int i = 0; i < 10000; ++i) {
            double a = uniform(rng, 0.0, 100.0);
            double b = uniform(rng, 0.0, 100.0);
            if (a == b) continue;
            CHECK((a < b) == (reward(a) > reward(b)));
        }
    }

    TEST_CASE("quantile examples")
    {
        std::vector<double> v { 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8 };
        CHECK(empirical_quantile(v, 0.5) == 0.5);
        CHECK(empirical_quantile(v, 1.0) == 0.1);
        CHECK(empirical_quantile(std::vector<double> { 0.7, 0.7, 0.7 }, 0.5) == 0.7);
        CHECK(empirical_quantile(v, 1e-9) == 0.8);
        CHECK_THROWS_AS(empirical_quantile(std::vector<double> {}, 0.5), Error);
        CHECK_THROWS_AS(empirical_quantile(v, 0.0), Error);
        CHECK_THROWS_AS(empirical_quantile(v, 1.5), Error);
    }

    TEST_CASE("quantile matches counting oracle")
    {
        Rng rng(2);
        for (int trial = 0; trial < 1000; ++trial) {
            std::size_t n = 1 + rng() % 40;
            std::vector<double> v;
            for (std::size_t i = 0; i < n; ++i) {
                // coarse values to force ties
                v.push_back(std::round(uniform(rng, 0.0, 1.0) * 10.0) / 10.0);
            }
            double eps = uniform(rng, 0.01, 1.0);
            double q = empirical_quantile(v, eps);
            CHECK(q == oracle::quantile_by_counting(v, eps));
            CHECK(std::find(v.begin(), v.end(), q) != v.end());
            auto k = static_cast<std::size_t>(std::ceil(eps * static_cast<double>(n)));
            CHECK(static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [&](double x) { return x >= q; })) >= k);
        }
    }

    TEST_CASE("pool basics")
    {
        CandidatePool pool(2);
        CHECK_THROWS_AS((void)pool.best(), Error);
        CHECK_THROWS_AS(CandidatePool(0), Error);
        CHECK(pool.insert({ { 1 }, { 0.1 }, 0.5, 0 }));
        CHECK(pool.best().assignment == OperatorAssignment { 1 });
        CHECK(pool.insert({ { 2 }, { 0.2 }, 0.7, 1 }));
        CHECK_FALSE(pool.insert({ { 3 }, {}, 0.4, 2 }));
        CHECK_FALSE(pool.insert({ { 3 }, {}, 0.5, 2 }));
        CHECK(pool.size() == 2);
        // duplicate with a higher reward replaces in place
        CHECK(pool.insert({ { 1 }, { 9.0 }, 0.8, 3 }));
        CHECK(pool.size() == 2);
        CHECK(pool.best().assignment == OperatorAssignment { 1 });
        CHECK(pool.best().coefficients == std::vector<double> { 9.0 });
        CHECK_FALSE(pool.insert({ { 1 }, { 1.0 }, 0.8, 4 }));

        CandidatePool ties(3);
        ties.insert({ { 5 }, {}, 0.6, 7 });
        ties.insert({ { 6 }, {}, 0.6, 2 });
        CHECK(ties.best().assignment == OperatorAssignment { 6 });
    }

    TEST_CASE("pool matches brute-force top-C on random streams")
    {
        Rng rng(3);
        for (std::size_t capacity : { 1, 5, 10, 20 }) {
            for (int trial = 0; trial < 250; ++trial) {
                CandidatePool pool(capacity);
                std::vector<oracle::PoolRecord> stream;
                std::size_t length = 1 + rng() % 1000;
                if (trial % 50 == 0) length = 1000;
                for (std::size_t i = 0; i < length; ++i) {
                    OperatorAssignment a { static_cast<int>(rng() % 60), static_cast<int>(rng() % 3) };
                    double r = std::round(uniform(rng, 0.0, 1.0) * 200.0) / 200.0;
                    stream.push_back({ a, r, i });
                    double before_min = pool.size() == capacity ? pool.entries().back().reward : -1.0;
                    bool changed = pool.insert({ a, {}, r, i });
                    if (!changed && pool.size() == capacity) {
                        bool dup = false;
                        for (const auto& e : pool.entries()) dup = dup || e.assignment == a;
                        if (!dup) CHECK(before_min >= r);
                    }
                    CHECK(pool.size() <= capacity);
                }
                auto expect = oracle::pool_top_c(stream, capacity);
                REQUIRE(pool.size() == expect.size());
                for (std::size_t k = 0; k < expect.size(); ++k) {
                    CHECK(pool.entries()[k].assignment == expect[k].assignment);
                    CHECK(pool.entries()[k].reward == expect[k].reward);
                    CHECK(pool.entries()[k].iteration == expect[k].iteration);
                }
                double stream_max = 0.0;
                for (const auto& s : stream) stream_max = std::max(stream_max, s.reward);
                CHECK(pool.best().reward == stream_max);
            }
        }
    }
}
