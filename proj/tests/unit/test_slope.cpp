#include "fdrsel/errors.hpp"
#include "fdrsel/slope.hpp"
#include "fdrsel/sorted_l1.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace fdrsel;
using namespace fdrsel::testing;

namespace {

Vector random_lambda(Index p, RngStream& rng)
{
    Vector l(p);
    for (Index j = 0; j < p; ++j) l[j] = 2.0 * rng.uniform();
    std::sort(l.data(), l.data() + p, std::greater<>());
    return l;
}

// upper-tail normal quantile by bisection on erfc
double upper_quantile_bisect(double alpha)
{
    double lo = 0.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(mid / std::sqrt(2.0)) > alpha ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Dataset gaussian_problem(Index n, Index p, Index k, double amplitude, std::uint64_t seed)
{
    RngStream rng(seed);
    Matrix X = normal_matrix(n, p, rng) / std::sqrt(static_cast<double>(n));
    Vector beta = Vector::Zero(p);
    beta.head(k).setConstant(amplitude);
    Vector y = X * beta + normal_vector(n, rng);
    y.array() += 1.5;
    return Dataset(y, X);
}

} // namespace

TEST(SortedL1, NormMatchesDefinition)
{
    const Vector beta = (Vector(4) << -1.0, 3.0, 0.0, 2.0).finished();
    const Vector lambda = (Vector(4) << 4.0, 3.0, 2.0, 1.0).finished();
    EXPECT_DOUBLE_EQ(sorted_l1_norm(beta, lambda), 4 * 3 + 3 * 2 + 2 * 1 + 0.0);
}

TEST(SortedL1, NormAxioms)
{
    RngStream rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        const Index p = 1 + rng.below(12);
        const Vector lambda = random_lambda(p, rng) + Vector::Constant(p, 0.01);
        const Vector a = normal_vector(p, rng), b = normal_vector(p, rng);
        const double s = 3.0 * rng.normal();
        EXPECT_GE(sorted_l1_norm(a, lambda), 0.0);
        EXPECT_NEAR(sorted_l1_norm(s * a, lambda), std::fabs(s) * sorted_l1_norm(a, lambda), 1e-10);
        EXPECT_LE(sorted_l1_norm(a + b, lambda), sorted_l1_norm(a, lambda) + sorted_l1_norm(b, lambda) + 1e-12);
        // dual pairing
        EXPECT_LE(std::fabs(a.dot(b)), sorted_l1_norm(a, lambda) * sorted_l1_dual_norm(b, lambda) + 1e-10);
    }
}

TEST(SortedL1, ProxMatchesEnumerationOracle)
{
    RngStream rng(2024);
    for (int rep = 0; rep < 300; ++rep) {
        const Index p = 1 + rng.below(6);
        const Vector lambda = random_lambda(p, rng);
        Vector v = 2.0 * normal_vector(p, rng);
        if (rep % 5 == 0 && p > 1) v[1] = -v[0];  // ties in magnitude
        const Vector got = prox_sorted_l1(v, lambda);
        const Vector want = prox_by_enumeration(v, lambda);
        EXPECT_LE((got - want).lpNorm<Eigen::Infinity>(), 1e-9) << "rep " << rep;
    }
}

TEST(SortedL1, ProxWithConstantLambdaIsSoftThreshold)
{
    RngStream rng(5);
    const Vector v = 3.0 * normal_vector(20, rng);
    const Vector x = prox_sorted_l1(v, Vector::Constant(20, 1.25));
    for (Index j = 0; j < 20; ++j)
        EXPECT_NEAR(x[j], std::copysign(std::max(std::fabs(v[j]) - 1.25, 0.0), v[j]), 1e-14);
}

TEST(SortedL1, ProxIsNonExpansiveAndOrderPreserving)
{
    RngStream rng(6);
    for (int rep = 0; rep < 200; ++rep) {
        const Index p = 2 + rng.below(30);
        const Vector lambda = random_lambda(p, rng);
        const Vector a = 2.0 * normal_vector(p, rng), b = 2.0 * normal_vector(p, rng);
        const Vector pa = prox_sorted_l1(a, lambda), pb = prox_sorted_l1(b, lambda);
        EXPECT_LE((pa - pb).norm(), (a - b).norm() + 1e-12);
        for (Index i = 0; i < p; ++i) {
            EXPECT_TRUE(pa[i] == 0.0 || std::signbit(pa[i]) == std::signbit(a[i]));
            for (Index j = 0; j < p; ++j)
                if (std::fabs(a[i]) > std::fabs(a[j])) EXPECT_GE(std::fabs(pa[i]), std::fabs(pa[j]) - 1e-12);
        }
        // optimality certificate: v - x is a subgradient of J at x
        const Vector r = a - pa;
        EXPECT_LE(sorted_l1_dual_norm(r, lambda), 1.0 + 1e-10);
        EXPECT_NEAR(r.dot(pa), sorted_l1_norm(pa, lambda), 1e-9);
    }
}

TEST(SortedL1, DualNormOfLambdaIsOne)
{
    const Vector lambda = (Vector(3) << 3.0, 2.0, 1.0).finished();
    EXPECT_NEAR(sorted_l1_dual_norm(lambda, lambda), 1.0, 1e-15);
    EXPECT_NEAR(sorted_l1_dual_norm(Vector::Zero(3), lambda), 0.0, 0.0);
}

TEST(Lambda, BhMatchesQuantileOracle)
{
    const auto l = make_lambda(LambdaRule::bh, 1000, {.c = 1.0, .q = 0.2});
    for (Index j : {1, 100, 1000})
        EXPECT_NEAR(l.values[j - 1], upper_quantile_bisect(static_cast<double>(j) * 0.2 / 2000.0), 1e-9);
    EXPECT_NEAR(l.values[0], 3.7190164854556804, 1e-9);
    EXPECT_NEAR(l.values[999], 1.2815515655446004, 1e-9);
}

TEST(Lambda, SequencesAreNonIncreasing)
{
    for (LambdaRule rule : {LambdaRule::bh, LambdaRule::second_order, LambdaRule::inflated_bh, LambdaRule::heuristic}) {
        const auto l = make_lambda(rule, 300, {.q = 0.1, .n = 200});
        for (Index j = 1; j < l.size(); ++j) EXPECT_LE(l.values[j], l.values[j - 1]) << to_string(rule);
        EXPECT_GE(l.values.minCoeff(), 0.0);
    }
}

TEST(Lambda, HeuristicStartsAtBhAndDominatesIt)
{
    const auto bh = make_lambda(LambdaRule::bh, 500, {.q = 0.2});
    const auto h = make_lambda(LambdaRule::heuristic, 500, {.q = 0.2, .n = 1000});
    EXPECT_DOUBLE_EQ(h.values[0], bh.values[0]);
    EXPECT_FALSE(h.truncated);
    // with n = p the last indices run out of degrees of freedom
    EXPECT_TRUE(make_lambda(LambdaRule::heuristic, 500, {.q = 0.2, .n = 500}).truncated);
    for (Index j = 0; j < 500; ++j) EXPECT_GE(h.values[j], bh.values[j] - 1e-12);
    // once the correction stops shrinking the sequence goes flat
    EXPECT_DOUBLE_EQ(h.values[499], h.values[498]);
}

TEST(Lambda, HeuristicTruncatesWhenDenominatorVanishes)
{
    const auto h = make_lambda(LambdaRule::heuristic, 50, {.q = 0.2, .n = 20});
    EXPECT_TRUE(h.truncated);
    EXPECT_TRUE(std::isfinite(h.values.sum()));
    EXPECT_DOUBLE_EQ(h.values[49], h.values[17]);
}

TEST(Lambda, RejectsInvalidInput)
{
    EXPECT_THROW(make_lambda(LambdaRule::bh, 10, {.q = 0.0}), Error);
    EXPECT_THROW(make_lambda(LambdaRule::bh, 10, {.q = 1.0}), Error);
    EXPECT_THROW(make_lambda(LambdaRule::heuristic, 10, {}), Error);
    EXPECT_THROW(explicit_lambda((Vector(2) << 1.0, 2.0).finished()), Error);
    EXPECT_THROW(explicit_lambda(Vector::Zero(3)), Error);
    EXPECT_THROW(parse_lambda_rule("nope"), Error);
    EXPECT_EQ(parse_lambda_rule("second-order"), LambdaRule::second_order);
}

TEST(Lambda, CsvRoundTrip)
{
    const auto l = make_lambda(LambdaRule::bh, 17, {.q = 0.3});
    const auto path = std::filesystem::temp_directory_path() / "fdrsel_lambda_roundtrip.csv";
    write_lambda_csv(path, l);
    const auto back = read_lambda_csv(path);
    std::filesystem::remove(path);
    ASSERT_EQ(back.size(), 17);
    EXPECT_LE((back.values - l.values).lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(Slope, OrthogonalDesignReducesToProx)
{
    RngStream rng(8);
    const Index n = 64, p = 16;
    const Matrix X = hadamard_columns(n, p) / std::sqrt(static_cast<double>(n));
    Vector beta = Vector::Zero(p);
    beta.head(4) << 5, -4, 3, 3;
    const Vector y = X * beta + normal_vector(n, rng);
    const Dataset d(y, X);
    const auto lambda = make_lambda(LambdaRule::bh, p, {.q = 0.2});
    const auto fit = fit_slope(d, lambda);
    ASSERT_TRUE(fit.converged);
    const Vector expected = prox_sorted_l1(X.transpose() * y, lambda.values);
    EXPECT_LE((fit.coefficients - expected).lpNorm<Eigen::Infinity>(), 1e-6);
    EXPECT_NEAR(fit.intercept, y.mean(), 1e-6);
}

TEST(Slope, KktAndReferenceObjective)
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Dataset d = gaussian_problem(50, 30, 5, 4.0, seed);
        const auto lambda = make_lambda(LambdaRule::bh, 30, {.q = 0.2}).scaled(0.5);
        const auto fit = fit_slope(d, lambda);
        EXPECT_TRUE(fit.converged);
        EXPECT_LE(kkt_residual(d, lambda, fit.coefficients, fit.intercept), 1e-6);
        const auto ref = proximal_gradient_reference(d.X(), d.y(), lambda.values,
                                                     [](const Vector& v, const Vector& l) { return prox_sorted_l1(v, l); });
        EXPECT_LE(std::fabs(fit.objective - ref.objective), 1e-6 * std::max(1.0, ref.objective));
    }
}

TEST(Slope, GramAndDirectAgree)
{
    const Dataset d = gaussian_problem(80, 40, 6, 5.0, 99);
    const auto lambda = make_lambda(LambdaRule::bh, 40, {.q = 0.1}).scaled(0.7);
    SlopeOptions a, b;
    a.gram = SlopeOptions::Gram::always;
    b.gram = SlopeOptions::Gram::never;
    const auto fa = fit_slope(d, lambda, a), fb = fit_slope(d, lambda, b);
    EXPECT_LE((fa.coefficients - fb.coefficients).lpNorm<Eigen::Infinity>(), 1e-4);
    EXPECT_NEAR(fa.objective, fb.objective, 1e-6 * fa.objective);
}

TEST(Slope, ZeroAboveZeroScale)
{
    const Dataset d = gaussian_problem(60, 20, 3, 5.0, 3);
    const auto lambda = make_lambda(LambdaRule::bh, 20, {.q = 0.2});
    const SlopeSolver solver(d);
    const double s0 = solver.zero_scale(lambda);
    EXPECT_EQ(solver.fit(lambda.scaled(s0 * 1.01)).nonzero(), 0);
    EXPECT_GT(solver.fit(lambda.scaled(s0 * 0.9)).nonzero(), 0);
    const auto path = solver.path(lambda, {0.2 * s0, s0 * 1.5, 0.6 * s0});
    ASSERT_EQ(path.size(), 3u);
    EXPECT_EQ(path[0].nonzero(), 0);
    EXPECT_LE(path[1].nonzero(), path[2].nonzero());
}

TEST(Slope, NoInterceptFit)
{
    const Dataset d = gaussian_problem(50, 10, 2, 4.0, 4);
    SlopeOptions opt;
    opt.intercept = false;
    const auto lambda = make_lambda(LambdaRule::bh, 10, {.q = 0.2});
    const auto fit = fit_slope(d, lambda, opt);
    EXPECT_EQ(fit.intercept, 0.0);
    EXPECT_LE(kkt_residual(d, lambda, fit.coefficients, 0.0, false), 1e-6);
}

TEST(Slope, BinomialKkt)
{
    RngStream rng(21);
    const Index n = 200, p = 15;
    const Matrix X = normal_matrix(n, p, rng);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
        const double eta = 0.3 + 1.5 * X(i, 0) - X(i, 1);
        y[i] = rng.uniform() < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
    }
    const Dataset d(y, X, Family::binomial);
    const auto lambda = make_lambda(LambdaRule::bh, p, {.q = 0.2}).scaled(2.0);
    const auto fit = fit_slope(d, lambda);
    EXPECT_TRUE(fit.converged);
    EXPECT_LE(kkt_residual(d, lambda, fit.coefficients, fit.intercept), 1e-6);
    EXPECT_GT(fit.coefficients[0], 0.0);
    EXPECT_LT(fit.coefficients[1], 0.0);
}

TEST(Slope, Clusters)
{
    const Vector beta = (Vector(6) << 2.0, -2.0, 0.0, 1.0, 2.0 + 1e-10, -0.5).finished();
    const auto c = equal_magnitude_clusters(beta);
    ASSERT_EQ(c.size(), 3u);
    EXPECT_EQ(c[0], (std::vector<Index>{0, 1, 4}));
    EXPECT_EQ(c[1], (std::vector<Index>{3}));
    EXPECT_EQ(c[2], (std::vector<Index>{5}));
}

TEST(Slope, RejectsWrongLambdaLength)
{
    const Dataset d = gaussian_problem(30, 5, 1, 2.0, 1);
    EXPECT_THROW(fit_slope(d, make_lambda(LambdaRule::bh, 6)), Error);
}

TEST(MeanShift, LambdaValues)
{
    const auto l = mean_shift_lambda(10, 2.0);
    EXPECT_NEAR(l.values[0], 2.0 * std::sqrt(std::log(20.0)), 1e-14);
    EXPECT_NEAR(l.values[9], 2.0 * std::sqrt(std::log(2.0)), 1e-14);
}

TEST(MeanShift, FlagsGrossOutliers)
{
    RngStream rng(31);
    const Index n = 100, p = 5;
    const Matrix X = normal_matrix(n, p, rng);
    Vector y = X.col(0) * 2.0 + normal_vector(n, rng);
    y[7] += 25.0;
    y[42] -= 30.0;
    const Dataset d(y, X);
    const auto lb = make_lambda(LambdaRule::bh, p, {.q = 0.2});
    const auto fit = fit_mean_shift(d, lb, mean_shift_lambda(n), 1.0, 1.0);
    EXPECT_TRUE(fit.converged);
    EXPECT_GT(fit.shifts[7], 10.0);
    EXPECT_LT(fit.shifts[42], -10.0);
    EXPECT_NEAR(fit.coefficients[0], 2.0, 0.4);
}

TEST(MeanShift, LargeShiftPenaltyGivesPlainSlope)
{
    const Dataset d = gaussian_problem(40, 8, 2, 4.0, 12);
    const auto lb = make_lambda(LambdaRule::bh, 8, {.q = 0.2});
    const auto ms = fit_mean_shift(d, lb, mean_shift_lambda(40), 1.0, 1e4);
    const auto plain = fit_slope(d, lb);
    EXPECT_EQ((ms.shifts.array() != 0.0).count(), 0);
    EXPECT_LE((ms.coefficients - plain.coefficients).lpNorm<Eigen::Infinity>(), 1e-4);
    EXPECT_NEAR(ms.intercept, plain.intercept, 1e-4);
}
