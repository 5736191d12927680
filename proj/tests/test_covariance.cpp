#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "gmix/covariance.hpp"
#include "oracles.hpp"

using namespace gmix;

namespace {

Matrix multiply(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k)
            for (std::size_t j = 0; j < b.cols(); ++j)
                out(i, j) += a(i, k) * b(k, j);
    return out;
}

double max_abs(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
    return worst;
}

Matrix identity(std::size_t p) {
    Matrix eye(p, p, 0.0);
    for (std::size_t i = 0; i < p; ++i) eye(i, i) = 1.0;
    return eye;
}

}  // namespace

TEST_SUITE("covariance") {

TEST_CASE("kind names round-trip") {
    for (auto kind : {CovarianceKind::IID, CovarianceKind::BlockDiagonal,
                      CovarianceKind::AR1, CovarianceKind::Banded}) {
        CHECK(parse_covariance_kind(covariance_kind_name(kind)) == kind);
    }
    CHECK_THROWS_AS(parse_covariance_kind("toeplitz"), std::invalid_argument);
}

TEST_CASE("correlation structures have the advertised entries") {
    CovarianceModel ar1{CovarianceKind::AR1, 3, 1.0, 0.8, 0.4, 2};
    Matrix r = build_correlation(ar1);
    CHECK(r(0, 0) == 1.0);
    CHECK(r(0, 1) == doctest::Approx(0.8));
    CHECK(r(0, 2) == doctest::Approx(0.64));
    CHECK(r(2, 0) == doctest::Approx(0.64));

    CovarianceModel block{CovarianceKind::BlockDiagonal, 4, 1.0, 0.7, 0.4, 2};
    Matrix rb = build_correlation(block);
    CHECK(rb(0, 1) == doctest::Approx(0.7));
    CHECK(rb(1, 0) == doctest::Approx(0.7));
    CHECK(rb(2, 3) == doctest::Approx(0.7));
    CHECK(rb(1, 2) == 0.0);
    CHECK(rb(0, 3) == 0.0);

    CovarianceModel banded{CovarianceKind::Banded, 5, 1.0, 0.8, 0.4, 2};
    Matrix rw = build_correlation(banded);
    CHECK(rw(0, 1) == doctest::Approx(0.4));
    CHECK(rw(0, 2) == doctest::Approx(0.4));
    CHECK(rw(0, 3) == 0.0);
    CHECK(rw(4, 4) == 1.0);

    CovarianceModel iid{CovarianceKind::IID, 3, 1.0, 0.8, 0.4, 2};
    Matrix ri = build_correlation(iid);
    CHECK(max_abs(ri, identity(3)) == 0.0);
}

TEST_CASE("model validation") {
    CovarianceModel model;
    model.p = 0;
    CHECK_THROWS_AS(build_correlation(model), std::invalid_argument);
    model.p = 4;
    model.sigma2 = -1.0;
    CHECK_THROWS_AS(build_correlation(model), std::invalid_argument);
    model.sigma2 = 1.0;
    model.kind = CovarianceKind::AR1;
    model.rho = 1.0;
    CHECK_THROWS_AS(build_correlation(model), std::invalid_argument);
    model.rho = 0.5;
    model.kind = CovarianceKind::BlockDiagonal;
    model.p = 5;
    CHECK_THROWS_AS(build_correlation(model), std::invalid_argument);
    model.p = 4;
    model.kind = CovarianceKind::Banded;
    model.band_width = 0;
    CHECK_THROWS_AS(build_correlation(model), std::invalid_argument);
}

TEST_CASE("2x2 factors match the closed-form eigendecomposition") {
    CovarianceModel model{CovarianceKind::AR1, 2, 2.0, 0.8, 0.4, 2};
    CovarianceFactors factors = factorize(model);
    double sqrt_ref[4];
    double inv_ref[4];
    oracle::sym2x2_apply(2.0, 1.6, 2.0, [](double l) { return std::sqrt(l); },
                         sqrt_ref);
    oracle::sym2x2_apply(2.0, 1.6, 2.0, [](double l) { return 1.0 / l; },
                         inv_ref);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            CHECK(factors.sqrt_sigma(i, j) ==
                  doctest::Approx(sqrt_ref[2 * i + j]).epsilon(1e-12));
            CHECK(factors.inv_sigma(i, j) ==
                  doctest::Approx(inv_ref[2 * i + j]).epsilon(1e-12));
        }
    }
    CHECK(factors.inv_diag[0] == factors.inv_sigma(0, 0));
    CHECK(factors.inv_diag[1] == factors.inv_sigma(1, 1));
}

TEST_CASE("square root and inverse are consistent for every structure") {
    for (auto kind : {CovarianceKind::IID, CovarianceKind::BlockDiagonal,
                      CovarianceKind::AR1, CovarianceKind::Banded}) {
        for (int p : {4, 10, 50}) {
            CovarianceModel model{kind, p, 2.0, 0.8, 0.4, 2};
            CAPTURE(covariance_kind_name(kind));
            CAPTURE(p);
            CovarianceFactors factors = factorize(model);
            CHECK(max_abs(multiply(factors.sqrt_sigma, factors.sqrt_sigma),
                          factors.sigma) < 1e-10);
            CHECK(max_abs(multiply(factors.inv_sigma, factors.sigma),
                          identity(p)) < 1e-8);
        }
    }
}

TEST_CASE("ar1 inverse is the known tridiagonal matrix") {
    const int p = 30;
    const double rho = 0.8;
    const double sigma2 = 2.0;
    CovarianceModel model{CovarianceKind::AR1, p, sigma2, rho, 0.4, 2};
    CovarianceFactors factors = factorize(model);
    const double scale = 1.0 / (sigma2 * (1.0 - rho * rho));
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            double expected = 0.0;
            if (i == j) {
                bool interior = i > 0 && i < p - 1;
                expected = scale * (interior ? 1.0 + rho * rho : 1.0);
            } else if (std::abs(i - j) == 1) {
                expected = -scale * rho;
            }
            CHECK(factors.inv_sigma(i, j) ==
                  doctest::Approx(expected).scale(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("identity covariance factors to itself") {
    CovarianceModel model{CovarianceKind::IID, 6, 1.0, 0.8, 0.4, 2};
    CovarianceFactors factors = factorize(model);
    CHECK(max_abs(factors.sigma, identity(6)) < 1e-14);
    CHECK(max_abs(factors.sqrt_sigma, identity(6)) < 1e-14);
    CHECK(max_abs(factors.inv_sigma, identity(6)) < 1e-14);
}

TEST_CASE("indefinite matrices are rejected with the eigenvalue in the message") {
    // Full-width band of -0.4 has an eigenvalue 1.4 - 0.4 p < 0 along the
    // all-ones direction.
    CovarianceModel model{CovarianceKind::Banded, 8, 1.0, 0.8, -0.4, 8};
    try {
        factorize(model);
        FAIL("expected factorize to throw");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("eigenvalue") != std::string::npos);
    }
}

}  // TEST_SUITE
