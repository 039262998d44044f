#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loadsr/data.hpp"

namespace loadsr {

inline constexpr double baseline_ridge = 1e-10;

enum class BaselineKind { Polynomial, Zip };

struct BaselineFit {
    BaselineKind kind = BaselineKind::Polynomial;
    std::size_t degree = 0;          // polynomial only
    std::vector<double> parameters;  // polynomial: monomial coefficients; zip: (p0, a_z, a_i, a_p)
    double train_rmse = 0.0;
    std::optional<double> test_rmse;

    [[nodiscard]] std::string name() const;
};

// Least squares on monomials via ridge-stabilized normal equations. For d = 1 the monomials are
// 1, x, ..., x^degree. For d > 1 the design holds 1, x_j and x_j*x_k (j <= k) when degree >= 2.
BaselineFit fit_polynomial(const Dataset& train, std::size_t degree, const Dataset* test = nullptr);

// Least squares on [V^2, V, 1]; shares normalized so a_z + a_i + a_p = 1.
BaselineFit fit_zip(const Dataset& train, const Dataset* test = nullptr);

std::vector<double> predict(const BaselineFit& fit, const Matrix& X);

// Solves (A^T A + ridge I) c = A^T y with column scaling; throws FitFailed when the scaled
// system is numerically rank deficient. Rows of A are samples.
std::vector<double> least_squares(const Matrix& A, std::span<const double> y, double ridge = baseline_ridge);

double rmse(std::span<const double> prediction, std::span<const double> truth);

} // namespace loadsr
