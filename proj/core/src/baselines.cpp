#include "loadsr/baselines.hpp"

#include <cmath>

#include <fmt/core.h>

#include "loadsr/error.hpp"

namespace loadsr {

namespace {

constexpr double rank_tolerance = 1e-9;

Matrix polynomial_design(const Matrix& X, std::size_t degree)
{
    const std::size_t n = X.rows();
    const std::size_t d = X.cols();
    std::vector<double> row;
    Matrix A;
    for (std::size_t i = 0; i < n; ++i) {
        row.clear();
        row.push_back(1.0);
        if (d == 1) {
            double p = 1.0;
            for (std::size_t k = 1; k <= degree; ++k) {
                p *= X(i, 0);
                row.push_back(p);
            }
        } else {
            for (std::size_t j = 0; j < d; ++j) {
                row.push_back(X(i, j));
            }
            if (degree >= 2) {
                for (std::size_t j = 0; j < d; ++j) {
                    for (std::size_t k = j; k < d; ++k) {
                        row.push_back(X(i, j) * X(i, k));
                    }
                }
            }
        }
        A.append_row(row);
    }
    return A;
}

Matrix zip_design(const Matrix& X)
{
    Matrix A(X.rows(), 3);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double v = X(i, 0);
        A(i, 0) = v * v;
        A(i, 1) = v;
        A(i, 2) = 1.0;
    }
    return A;
}

std::vector<double> multiply(const Matrix& A, std::span<const double> c)
{
    std::vector<double> out(A.rows(), 0.0);
    for (std::size_t i = 0; i < A.rows(); ++i) {
        for (std::size_t j = 0; j < A.cols(); ++j) {
            out[i] += A(i, j) * c[j];
        }
    }
    return out;
}

} // namespace

std::string BaselineFit::name() const
{
    return kind == BaselineKind::Zip ? std::string("zip") : fmt::format("poly{}", degree);
}

double rmse(std::span<const double> prediction, std::span<const double> truth)
{
    if (prediction.size() != truth.size() || truth.empty()) {
        throw Error(ErrorKind::InvalidArgument, "rmse needs equal-length nonempty vectors");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        double e = prediction[i] - truth[i];
        s += e * e;
    }
    return std::sqrt(s / static_cast<double>(truth.size()));
}

std::vector<double> least_squares(const Matrix& A, std::span<const double> y, double ridge)
{
    const std::size_t n = A.rows();
    const std::size_t p = A.cols();
    if (n == 0 || y.size() != n) {
        throw Error(ErrorKind::FitFailed, "least squares needs matching nonempty design and target");
    }
    std::vector<double> scale(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            scale[j] += A(i, j) * A(i, j);
        }
    }
    for (std::size_t j = 0; j < p; ++j) {
        scale[j] = std::sqrt(scale[j]);
        if (!(scale[j] > 0.0)) {
            throw Error(ErrorKind::FitFailed, fmt::format("design column {} is identically zero", j));
        }
    }

    // scaled normal equations G c' = b, with c = c' / scale
    std::vector<double> G(p * p, 0.0);
    std::vector<double> b(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            double aij = A(i, j) / scale[j];
            b[j] += aij * y[i];
            for (std::size_t k = 0; k <= j; ++k) {
                G[j * p + k] += aij * (A(i, k) / scale[k]);
            }
        }
    }
    for (std::size_t j = 0; j < p; ++j) {
        G[j * p + j] += ridge;
    }

    // Cholesky, lower triangle in place
    for (std::size_t j = 0; j < p; ++j) {
        double diag = G[j * p + j];
        for (std::size_t k = 0; k < j; ++k) {
            diag -= G[j * p + k] * G[j * p + k];
        }
        if (!(diag > rank_tolerance)) {
            throw Error(ErrorKind::FitFailed,
                        fmt::format("design is rank deficient (pivot {:.3g} at column {})", diag, j));
        }
        G[j * p + j] = std::sqrt(diag);
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = G[i * p + j];
            for (std::size_t k = 0; k < j; ++k) {
                s -= G[i * p + k] * G[j * p + k];
            }
            G[i * p + j] = s / G[j * p + j];
        }
    }
    std::vector<double> z(p);
    for (std::size_t i = 0; i < p; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) {
            s -= G[i * p + k] * z[k];
        }
        z[i] = s / G[i * p + i];
    }
    std::vector<double> c(p);
    for (std::size_t i = p; i-- > 0;) {
        double s = z[i];
        for (std::size_t k = i + 1; k < p; ++k) {
            s -= G[k * p + i] * c[k];
        }
        c[i] = s / G[i * p + i];
    }
    for (std::size_t j = 0; j < p; ++j) {
        c[j] /= scale[j];
    }
    return c;
}

std::vector<double> predict(const BaselineFit& fit, const Matrix& X)
{
    if (fit.kind == BaselineKind::Zip) {
        std::vector<double> out(X.rows());
        const double p0 = fit.parameters[0];
        for (std::size_t i = 0; i < X.rows(); ++i) {
            double v = X(i, 0);
            out[i] = p0 * (fit.parameters[1] * v * v + fit.parameters[2] * v + fit.parameters[3]);
        }
        return out;
    }
    return multiply(polynomial_design(X, fit.degree), fit.parameters);
}

BaselineFit fit_polynomial(const Dataset& train, std::size_t degree, const Dataset* test)
{
    if (degree == 0) {
        throw Error(ErrorKind::InvalidConfig, "polynomial degree must be at least 1");
    }
    BaselineFit fit;
    fit.kind = BaselineKind::Polynomial;
    fit.degree = train.cols() == 1 ? degree : std::min<std::size_t>(degree, 2);
    fit.parameters = least_squares(polynomial_design(train.X, fit.degree), train.y);
    fit.train_rmse = rmse(predict(fit, train.X), train.y);
    if (test != nullptr && test->rows() > 0) {
        fit.test_rmse = rmse(predict(fit, test->X), test->y);
    }
    return fit;
}

BaselineFit fit_zip(const Dataset& train, const Dataset* test)
{
    if (train.cols() != 1) {
        throw Error(ErrorKind::FitFailed, "ZIP fit needs exactly one voltage column");
    }
    for (std::size_t i = 0; i < train.rows(); ++i) {
        if (!(train.X(i, 0) > 0.0)) {
            throw Error(ErrorKind::FitFailed, "ZIP fit needs strictly positive voltage");
        }
    }
    std::vector<double> k;
    try {
        k = least_squares(zip_design(train.X), train.y);
    } catch (const Error& e) {
        throw Error(ErrorKind::FitFailed, fmt::format("ZIP fit failed: voltage has too little variation ({})", e.what()));
    }
    const double p0 = k[0] + k[1] + k[2];
    if (!(std::abs(p0) > 1e-12)) {
        throw Error(ErrorKind::FitFailed, "ZIP fit failed: fitted nominal power is zero");
    }
    BaselineFit fit;
    fit.kind = BaselineKind::Zip;
    fit.parameters = { p0, k[0] / p0, k[1] / p0, k[2] / p0 };
    fit.train_rmse = rmse(predict(fit, train.X), train.y);
    if (test != nullptr && test->rows() > 0) {
        fit.test_rmse = rmse(predict(fit, test->X), test->y);
    }
    return fit;
}

} // namespace loadsr
