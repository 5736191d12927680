#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>

#include "gmix/replica.hpp"
#include "gmix/stats.hpp"
#include "oracles.hpp"

using namespace gmix;

namespace {

const LossModel kLogistic{LossKind::Logistic};
const LossModel kHinge{LossKind::Hinge};

std::shared_ptr<const CovarianceFactors> factors_for(CovarianceKind kind, int p,
                                                     double sigma2) {
    CovarianceModel model{kind, p, sigma2, 0.8, 0.4, 2};
    return std::make_shared<CovarianceFactors>(factorize(model));
}

MixtureDesign test_design(CovarianceKind kind, int p, double sigma2,
                          double alpha, double lambda, std::uint64_t seed = 99) {
    Rng rng(seed);
    return make_design(factors_for(kind, p, sigma2), alpha, 0.1, lambda, 2.0, rng);
}

// Reference zeta-group values by adaptive quadrature over the Gaussian
// variable, sharing nothing with the Gauss-Hermite path.
ZetaGroup simpson_zeta_group(const OrderParameters& params,
                             const MixtureDesign& design,
                             const LossModel& loss) {
    const double s = std::sqrt(params.q0);
    const double m0 = params.r * design.mu_norm;
    auto residual = [&](double eps) {
        double m = m0 + s * eps;
        return prox(loss, {m, params.q}) - m;
    };
    double e1 = oracle::gauss_expect(residual, 1e-12);
    double ee = oracle::gauss_expect(
        [&](double eps) { return residual(eps) * eps; }, 1e-12);
    double e2 = oracle::gauss_expect(
        [&](double eps) { double d = residual(eps); return d * d; }, 1e-12);
    ZetaGroup out;
    out.zeta0 = design.alpha / (params.q * params.q) * e2;
    out.zeta = -design.alpha / (params.q * s) * ee;
    out.r0 = design.alpha * design.mu_norm / params.q * e1;
    return out;
}

}  // namespace

TEST_SUITE("replica") {

TEST_CASE("z stream is deterministic and carries Sigma^{1/2} z") {
    auto factors = factors_for(CovarianceKind::AR1, 8, 2.0);
    ZStream a = make_z_stream(*factors, 16, 5);
    ZStream b = make_z_stream(*factors, 16, 5);
    ZStream c = make_z_stream(*factors, 16, 6);
    REQUIRE(a.z.rows() == 16);
    REQUIRE(a.z.cols() == 8);
    bool identical = true;
    bool differs = false;
    for (std::size_t i = 0; i < a.z.rows(); ++i)
        for (std::size_t j = 0; j < a.z.cols(); ++j) {
            identical = identical && a.z(i, j) == b.z(i, j) && a.u(i, j) == b.u(i, j);
            differs = differs || a.z(i, j) != c.z(i, j);
        }
    CHECK(identical);
    CHECK(differs);
    for (std::size_t i = 0; i < a.z.rows(); ++i)
        for (std::size_t j = 0; j < a.z.cols(); ++j) {
            double expected = 0.0;
            for (std::size_t k = 0; k < 8; ++k)
                expected += factors->sqrt_sigma(j, k) * a.z(i, k);
            CHECK(a.u(i, j) == doctest::Approx(expected).scale(1.0).epsilon(1e-12));
        }
}

TEST_CASE("q group matches closed forms for ridge with isotropic covariance") {
    // With Sigma = sigma2 * I and the quadratic penalty the per-sample
    // minimizer is linear in b, so the three averages have exact expectations.
    const double sigma2 = 2.0;
    const double lambda = 0.4;
    MixtureDesign design =
        test_design(CovarianceKind::IID, 80, sigma2, 0.5, lambda);
    SolverOptions options;
    options.mc_samples = 3000;
    options.penalty = PenaltyKind::Quadratic;
    ZStream stream = make_z_stream(*design.covariance, options.mc_samples, 11);

    OrderParameters params;
    params.zeta0 = 1.3;
    params.zeta = 0.9;
    params.r0 = 0.7;
    QGroup got = update_q_group(params, design, options, stream);
    oracle::RidgeQGroup ref =
        oracle::ridge_q_group(params.zeta0, params.zeta, params.r0, sigma2, lambda);
    CHECK(std::abs(got.q0 - ref.q0) <= std::max(4.0 * got.q0_se, 1e-3));
    CHECK(std::abs(got.q - ref.q) <= std::max(4.0 * got.q_se, 1e-3));
    CHECK(std::abs(got.r - ref.r) <= std::max(4.0 * got.r_se, 1e-3));
    CHECK(got.q0_se < 0.05 * got.q0);
}

TEST_CASE("q group returns zero when the penalty kills every coordinate") {
    MixtureDesign design = test_design(CovarianceKind::IID, 20, 1.0, 0.5, 1e6);
    SolverOptions options;
    options.mc_samples = 50;
    ZStream stream = make_z_stream(*design.covariance, options.mc_samples, 3);
    QGroup got = update_q_group(OrderParameters{}, design, options, stream);
    CHECK(got.q0 == 0.0);
    CHECK(got.q == 0.0);
    CHECK(got.r == 0.0);
}

TEST_CASE("zeta group agrees with adaptive quadrature for the logistic loss") {
    MixtureDesign design = test_design(CovarianceKind::IID, 10, 1.0, 0.5, 0.1);
    OrderParameters params;
    params.q0 = 1.0;
    params.q = 1.0;
    params.r = 0.5;
    SolverOptions options;
    ZetaGroup got = update_zeta_group(params, design, kLogistic, options);
    ZetaGroup ref = simpson_zeta_group(params, design, kLogistic);
    CHECK(got.zeta0 == doctest::Approx(ref.zeta0).epsilon(1e-6));
    CHECK(got.zeta == doctest::Approx(ref.zeta).epsilon(1e-6));
    CHECK(got.r0 == doctest::Approx(ref.r0).epsilon(1e-6));
}

TEST_CASE("zeta group agrees with hinge partial-moment closed forms") {
    MixtureDesign design = test_design(CovarianceKind::IID, 10, 1.0, 0.6, 0.1);
    OrderParameters params;
    params.q0 = 0.8;
    params.q = 1.4;
    params.r = 0.3;
    SolverOptions options;
    options.quad_nodes = 400;  // the hinge residual has kinks, so brute force
    ZetaGroup got = update_zeta_group(params, design, kHinge, options);

    oracle::HingeMoments m = oracle::hinge_residual_moments(
        params.r * design.mu_norm, std::sqrt(params.q0), params.q);
    double zeta0 = design.alpha / (params.q * params.q) * m.e2;
    double zeta = -design.alpha / (params.q * std::sqrt(params.q0)) * m.ee;
    double r0 = design.alpha * design.mu_norm / params.q * m.e1;
    CHECK(got.zeta0 == doctest::Approx(zeta0).epsilon(2e-4));
    CHECK(got.zeta == doctest::Approx(zeta).epsilon(2e-4));
    CHECK(got.r0 == doctest::Approx(r0).epsilon(2e-4));
}

TEST_CASE("zeta group vanishes when every margin clears the hinge") {
    // r * mu = 10 with tiny spread puts all quadrature nodes far above 1, so
    // the proximal point equals the shift and all residuals are zero.
    MixtureDesign design = test_design(CovarianceKind::IID, 10, 1.0, 0.5, 0.1);
    OrderParameters params;
    params.q0 = 1e-6;
    params.q = 1.0;
    params.r = 5.0;
    ZetaGroup got = update_zeta_group(params, design, kHinge, SolverOptions{});
    CHECK(got.zeta0 == 0.0);
    CHECK(got.zeta == 0.0);
    CHECK(got.r0 == 0.0);
}

TEST_CASE("gauss-hermite order is converged at the production setting") {
    MixtureDesign design = test_design(CovarianceKind::IID, 10, 1.0, 0.5, 0.1);
    OrderParameters params;
    params.q0 = 2.0;
    params.q = 0.7;
    params.r = 0.4;
    SolverOptions coarse;
    coarse.quad_nodes = 32;
    SolverOptions fine;
    fine.quad_nodes = 64;
    ZetaGroup a = update_zeta_group(params, design, kLogistic, coarse);
    ZetaGroup b = update_zeta_group(params, design, kLogistic, fine);
    CHECK(a.zeta0 == doctest::Approx(b.zeta0).epsilon(1e-8));
    CHECK(a.zeta == doctest::Approx(b.zeta).epsilon(1e-8));
    CHECK(a.r0 == doctest::Approx(b.r0).epsilon(1e-8));
}

TEST_CASE("fixed point solves are deterministic and thread-invariant") {
    MixtureDesign design =
        test_design(CovarianceKind::AR1, 24, 2.0, 0.5, std::exp(-2.0));
    SolverOptions options;
    options.mc_samples = 96;
    options.seed = 17;

    FixedPointSolution a = solve_fixed_point(design, kLogistic, options);
    FixedPointSolution b = solve_fixed_point(design, kLogistic, options);
    CHECK(a.trace.iterates.size() == b.trace.iterates.size());
    CHECK(a.params.q0 == b.params.q0);
    CHECK(a.params.zeta == b.params.zeta);
    CHECK(a.params.r == b.params.r);

    SolverOptions threaded = options;
    threaded.threads = 3;
    FixedPointSolution c = solve_fixed_point(design, kLogistic, threaded);
    CHECK(a.params.q0 == c.params.q0);
    CHECK(a.params.zeta0 == c.params.zeta0);
    CHECK(a.params.zeta == c.params.zeta);
    CHECK(a.params.r0 == c.params.r0);
    CHECK(a.params.q == c.params.q);
    CHECK(a.params.r == c.params.r);

    CHECK(a.params.tau ==
          doctest::Approx(std::sqrt(a.params.zeta0) / a.params.zeta).epsilon(1e-14));
    CHECK(a.trace.converged);
    CHECK(a.trace.iterates.size() == a.trace.residuals.size());
}

TEST_CASE("different starting points land on the same fixed point") {
    MixtureDesign design =
        test_design(CovarianceKind::IID, 40, 2.0, 0.5, std::exp(-2.0));
    SolverOptions options;
    options.mc_samples = 600;
    options.seed = 23;
    FixedPointSolution a = solve_fixed_point(design, kLogistic, options);
    OrderParameters init;
    init.zeta0 = 0.5;
    init.zeta = 2.0;
    init.r0 = 0.4;
    init.q0 = 2.0;
    init.q = 0.5;
    init.r = 0.1;
    FixedPointSolution b = solve_fixed_point(design, kLogistic, options, init);
    CHECK(b.params.zeta0 == doctest::Approx(a.params.zeta0).epsilon(2e-3));
    CHECK(b.params.zeta == doctest::Approx(a.params.zeta).epsilon(2e-3));
    CHECK(b.params.r0 == doctest::Approx(a.params.r0).epsilon(2e-3));
    CHECK(b.params.q0 == doctest::Approx(a.params.q0).epsilon(2e-3));
    CHECK(b.params.q == doctest::Approx(a.params.q).epsilon(2e-3));
    CHECK(b.params.r == doctest::Approx(a.params.r).epsilon(2e-3));
}

TEST_CASE("re-evaluating the update groups at the solution is a no-op") {
    MixtureDesign design =
        test_design(CovarianceKind::AR1, 50, 2.0, 0.5, std::exp(-2.0));
    SolverOptions options;
    options.mc_samples = 800;
    options.seed = 29;
    FixedPointSolution sol = solve_fixed_point(design, kLogistic, options);

    ZStream stream =
        make_z_stream(*design.covariance, options.mc_samples, options.seed);
    QGroup qg = update_q_group(sol.params, design, options, stream);
    CHECK(std::abs(qg.q0 - sol.params.q0) <=
          std::max(1e-3 * sol.params.q0, 3.0 * qg.q0_se));
    CHECK(std::abs(qg.q - sol.params.q) <=
          std::max(1e-3 * sol.params.q, 3.0 * qg.q_se));
    CHECK(std::abs(qg.r - sol.params.r) <=
          std::max(1e-3 * std::abs(sol.params.r), 3.0 * qg.r_se));

    ZetaGroup zg = update_zeta_group(sol.params, design, kLogistic, options);
    CHECK(zg.zeta0 == doctest::Approx(sol.params.zeta0).epsilon(5e-3));
    CHECK(zg.zeta == doctest::Approx(sol.params.zeta).epsilon(5e-3));
    CHECK(zg.r0 == doctest::Approx(sol.params.r0).epsilon(5e-3));
}

TEST_CASE("hinge plus ridge reduces to a scalar system solved in closed form") {
    // Isotropic covariance and a quadratic penalty make the q group exact,
    // and the hinge moments make the zeta group exact, so the whole fixed
    // point can be iterated with scalars only and compared to the full
    // solver.
    const double sigma2 = 1.0;
    const double lambda = 0.3;
    const double alpha = 0.7;
    const double mu_norm = 2.0;
    Rng rng(71);
    MixtureDesign design = make_design(factors_for(CovarianceKind::IID, 60, sigma2),
                                       alpha, 0.1, lambda, mu_norm, rng);

    double zeta0 = 1.0, zeta = 1.0, r0 = 1.0;
    double q0 = 1.0, q = 1.0, r = 0.0;
    for (int iter = 0; iter < 4000; ++iter) {
        oracle::RidgeQGroup qg = oracle::ridge_q_group(zeta0, zeta, r0, sigma2, lambda);
        q0 = qg.q0;
        q = qg.q;
        r = qg.r;
        oracle::HingeMoments m =
            oracle::hinge_residual_moments(r * mu_norm, std::sqrt(q0), q);
        double nz0 = alpha / (q * q) * m.e2;
        double nz = -alpha / (q * std::sqrt(q0)) * m.ee;
        double nr0 = alpha * mu_norm / q * m.e1;
        double res = std::max({std::abs(nz0 - zeta0), std::abs(nz - zeta),
                               std::abs(nr0 - r0)});
        zeta0 = 0.5 * nz0 + 0.5 * zeta0;
        zeta = 0.5 * nz + 0.5 * zeta;
        r0 = 0.5 * nr0 + 0.5 * r0;
        if (res < 1e-12) break;
    }

    SolverOptions options;
    options.mc_samples = 4000;
    options.penalty = PenaltyKind::Quadratic;
    options.seed = 31;
    FixedPointSolution sol = solve_fixed_point(design, kHinge, options);
    CHECK(sol.params.zeta0 == doctest::Approx(zeta0).epsilon(0.02));
    CHECK(sol.params.zeta == doctest::Approx(zeta).epsilon(0.02));
    CHECK(sol.params.r0 == doctest::Approx(r0).epsilon(0.02));
    CHECK(sol.params.q0 == doctest::Approx(q0).epsilon(0.02));
    CHECK(sol.params.q == doctest::Approx(q).epsilon(0.02));
    CHECK(sol.params.r == doctest::Approx(r).epsilon(0.02));
}

TEST_CASE("an overwhelming penalty fails with the collapse diagnosis") {
    MixtureDesign design = test_design(CovarianceKind::IID, 20, 1.0, 0.5, 1e6);
    SolverOptions options;
    options.mc_samples = 60;
    try {
        solve_fixed_point(design, kLogistic, options);
        FAIL("expected the solve to throw");
    } catch (const FixedPointError& e) {
        CHECK(std::string(e.what()).find("fully-sparse") != std::string::npos);
    }
}

TEST_CASE("iteration budget exhaustion carries the trace") {
    MixtureDesign design =
        test_design(CovarianceKind::IID, 20, 1.0, 0.5, std::exp(-2.0));
    SolverOptions options;
    options.mc_samples = 60;
    options.max_iters = 1;
    try {
        solve_fixed_point(design, kLogistic, options);
        FAIL("expected the solve to throw");
    } catch (const FixedPointError& e) {
        CHECK(e.trace.iterates.size() == 1);
        CHECK_FALSE(e.trace.converged);
    }
}

TEST_CASE("theoretical precision") {
    OrderParameters params;
    params.r = 0.0;
    params.q0 = 1.0;
    CHECK(theoretical_precision(params, 2.0) == doctest::Approx(0.5));
    params.r = 1.0;
    CHECK(theoretical_precision(params, 2.0) ==
          doctest::Approx(0.9772498680518208).epsilon(1e-12));
    params.q0 = 0.25;
    CHECK(theoretical_precision(params, 1.0) ==
          doctest::Approx(0.9772498680518208).epsilon(1e-12));
    params.q0 = -1.0;
    CHECK_THROWS_AS(theoretical_precision(params, 2.0), std::invalid_argument);
}

TEST_CASE("coverage target lives on the scaled inverse-covariance mean") {
    MixtureDesign design = test_design(CovarianceKind::AR1, 12, 2.0, 0.5, 0.1);
    OrderParameters params;
    params.r0 = 0.8;
    params.zeta = 1.6;
    Vector target = coverage_target(params, design);
    REQUIRE(target.size() == 12);
    Vector mu_hat = design.mu;
    double norm = l2_norm(mu_hat);
    for (auto& v : mu_hat) v /= norm;
    Vector ref = matvec(design.covariance->inv_sigma, mu_hat);
    double scale = std::sqrt(12.0) * params.r0 / params.zeta;
    for (int j = 0; j < 12; ++j)
        CHECK(target[j] == doctest::Approx(scale * ref[j]).scale(1.0).epsilon(1e-12));
}

TEST_CASE("theoretical power reduces to the level under the null") {
    MixtureDesign design = test_design(CovarianceKind::AR1, 12, 2.0, 0.5, 0.1);
    OrderParameters params;
    params.r0 = 0.0;  // null: the limiting mean vanishes everywhere
    params.zeta = 1.3;
    params.zeta0 = 1.2;
    params.tau = std::sqrt(params.zeta0) / params.zeta;
    for (int j : {0, 5, 11})
        CHECK(theoretical_power(params, design, j, 0.05) ==
              doctest::Approx(0.05).epsilon(1e-10));

    // power grows with the limiting mean
    params.r0 = 0.5;
    double p1 = theoretical_power(params, design, 0, 0.05);
    params.r0 = 1.5;
    double p2 = theoretical_power(params, design, 0, 0.05);
    CHECK(p2 > p1);
    CHECK(p1 > 0.05);
    CHECK_THROWS_AS(theoretical_power(params, design, 0, 1.5), std::invalid_argument);
}

TEST_CASE("trace csv lists one row per iteration") {
    MixtureDesign design =
        test_design(CovarianceKind::IID, 20, 1.0, 0.5, std::exp(-1.0));
    SolverOptions options;
    options.mc_samples = 80;
    FixedPointSolution sol = solve_fixed_point(design, kLogistic, options);
    const std::string path = "replica_trace_test.csv";
    write_trace_csv(sol.trace, path);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line == "iteration,zeta0,zeta,r0,q0,q,r,tau,residual");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == static_cast<int>(sol.trace.iterates.size()));
    in.close();
    std::remove(path.c_str());
}

TEST_CASE("solver option validation") {
    MixtureDesign design = test_design(CovarianceKind::IID, 10, 1.0, 0.5, 0.1);
    SolverOptions options;
    options.mc_samples = 1;
    CHECK_THROWS_AS(solve_fixed_point(design, kLogistic, options),
                    std::invalid_argument);
    options = SolverOptions{};
    options.damping = 0.0;
    CHECK_THROWS_AS(solve_fixed_point(design, kLogistic, options),
                    std::invalid_argument);
    options = SolverOptions{};
    options.chunk_size = 0;
    CHECK_THROWS_AS(solve_fixed_point(design, kLogistic, options),
                    std::invalid_argument);
}

}  // TEST_SUITE
