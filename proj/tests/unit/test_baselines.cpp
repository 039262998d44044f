#include <doctest.h>

#include <cmath>

#include "loadsr/baselines.hpp"
#include "loadsr/error.hpp"
#include "oracles/least_squares.hpp"

using namespace loadsr;

namespace {

Dataset from_fn(std::size_t n, double lo, double hi, double (*f)(double))
{
    Dataset ds;
    ds.feature_names = { "x" };
    ds.target_name = "y";
    ds.X = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        ds.X(i, 0) = x;
        ds.y.push_back(f(x));
    }
    return ds;
}

} // namespace

TEST_SUITE("baselines")
{
    TEST_CASE("exact polynomial fits")
    {
        auto line = from_fn(50, -2.0, 2.0, [](double x) { return 2.0 * x + 1.0; });
        auto fit = fit_polynomial(line, 1);
        REQUIRE(fit.parameters.size() == 2);
        CHECK(std::abs(fit.parameters[0] - 1.0) <= 1e-9);
        CHECK(std::abs(fit.parameters[1] - 2.0) <= 1e-9);

        auto cubic = from_fn(60, -1.5, 1.5, [](double x) { return 0.5 - x + 0.25 * x * x - 2.0 * x * x * x; });
        auto c3 = fit_polynomial(cubic, 3, &cubic);
        CHECK(c3.train_rmse <= 1e-9);
        CHECK(*c3.test_rmse <= 1e-9);
        CHECK(c3.name() == "poly3");
    }

    TEST_CASE("degree-1 fit of a sine matches QR least squares")
    {
        auto ds = from_fn(400, -M_PI, M_PI, [](double x) { return std::sin(3.0 * x); });
        auto fit = fit_polynomial(ds, 1);
        Matrix A(ds.rows(), 2);
        for (std::size_t i = 0; i < ds.rows(); ++i) {
            A(i, 0) = 1.0;
            A(i, 1) = ds.X(i, 0);
        }
        auto c = oracle::qr_least_squares(A, ds.y);
        std::vector<double> pred;
        for (std::size_t i = 0; i < ds.rows(); ++i) pred.push_back(c[0] + c[1] * ds.X(i, 0));
        CHECK(std::abs(fit.train_rmse - rmse(pred, ds.y)) <= 1e-6);
    }

    TEST_CASE("least squares matches QR on random problems")
    {
        Rng rng(3);
        for (int trial = 0; trial < 50; ++trial) {
            std::size_t n = 30 + rng() % 50;
            std::size_t p = 1 + rng() % 5;
            Matrix A(n, p);
            std::vector<double> y(n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < p; ++j) A(i, j) = uniform(rng, -1.0, 1.0);
                y[i] = uniform(rng, -1.0, 1.0);
            }
            auto ours = least_squares(A, y);
            auto ref = oracle::qr_least_squares(A, y);
            for (std::size_t j = 0; j < p; ++j) CHECK(std::abs(ours[j] - ref[j]) <= 1e-6);
        }
    }

    TEST_CASE("multivariate degree-2 design")
    {
        Rng rng(4);
        Dataset ds;
        ds.X = Matrix(80, 2);
        for (std::size_t i = 0; i < 80; ++i) {
            double a = uniform(rng, -1.0, 1.0);
            double b = uniform(rng, -1.0, 1.0);
            ds.X(i, 0) = a;
            ds.X(i, 1) = b;
            ds.y.push_back(1.0 + a - 2.0 * b + 0.5 * a * b + 3.0 * b * b);
        }
        auto fit = fit_polynomial(ds, 2);
        CHECK(fit.parameters.size() == 6);
        CHECK(fit.train_rmse <= 1e-9);
        auto pred = predict(fit, ds.X);
        CHECK(rmse(pred, ds.y) == doctest::Approx(fit.train_rmse).epsilon(1e-12));
    }

    TEST_CASE("zip recovery")
    {
        TrajectoryConfig cfg;
        cfg.p0 = 1.7;
        cfg.a_z = 0.5;
        cfg.a_i = 0.2;
        cfg.a_p = 0.3;
        auto ds = generate(cfg);
        auto fit = fit_zip(ds);
        REQUIRE(fit.parameters.size() == 4);
        CHECK(std::abs(fit.parameters[0] - 1.7) <= 1e-4);
        CHECK(std::abs(fit.parameters[1] - 0.5) <= 1e-4);
        CHECK(std::abs(fit.parameters[2] - 0.2) <= 1e-4);
        CHECK(std::abs(fit.parameters[3] - 0.3) <= 1e-4);
        CHECK(fit.name() == "zip");

        // normalizing the shares leaves predictions unchanged
        Matrix A(ds.rows(), 3);
        for (std::size_t i = 0; i < ds.rows(); ++i) {
            double v = ds.X(i, 0);
            A(i, 0) = v * v;
            A(i, 1) = v;
            A(i, 2) = 1.0;
        }
        auto c = least_squares(A, ds.y);
        auto pred = predict(fit, ds.X);
        for (std::size_t i = 0; i < ds.rows(); ++i) {
            double direct = c[0] * A(i, 0) + c[1] * A(i, 1) + c[2];
            CHECK(pred[i] == doctest::Approx(direct).epsilon(1e-12));
        }
    }

    TEST_CASE("zip noise floor")
    {
        TrajectoryConfig cfg;
        cfg.noise_sigma = 0.01;
        cfg.seed = 9;
        auto ds = generate(cfg);
        auto fit = fit_zip(ds);
        CHECK(fit.train_rmse <= 0.02);
    }

    TEST_CASE("rank deficiency")
    {
        Dataset flat;
        flat.X = Matrix(20, 1);
        for (std::size_t i = 0; i < 20; ++i) {
            flat.X(i, 0) = 1.0;
            flat.y.push_back(2.0);
        }
        try {
            fit_zip(flat);
            FAIL("constant V accepted");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::FitFailed);
        }
        flat.X(3, 0) = -1.0;
        CHECK_THROWS_AS(fit_zip(flat), Error);
    }
}
