#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "coxsusie/survival.hpp"
#include "test_support.hpp"

using namespace coxsusie;
using namespace coxsusie::testing;

namespace {

SurvivalOutcome make_outcome(std::initializer_list<double> times,
                             std::initializer_list<int> status) {
    SurvivalOutcome out;
    out.times = Eigen::VectorXd(static_cast<Eigen::Index>(times.size()));
    out.status = Eigen::VectorXi(static_cast<Eigen::Index>(status.size()));
    Eigen::Index i = 0;
    for (double t : times) out.times[i++] = t;
    i = 0;
    for (int s : status) out.status[i++] = s;
    return out;
}

const Eigen::VectorXd kNoOffsets;

} // namespace

TEST_CASE("null likelihood equals -log of risk set sizes") {
    const auto outcome = make_outcome({1, 2, 3}, {1, 1, 1});
    Eigen::VectorXd x(3);
    x << 0.4, -1.2, 2.0;
    // b = 0: each event factor is 1/|risk set|, sizes 3, 2, 1.
    CHECK(partial_loglik(0.0, x, kNoOffsets, outcome) ==
          doctest::Approx(-std::log(6.0)).epsilon(1e-14));
}

TEST_CASE("constant offset cancels in every risk-set ratio") {
    std::mt19937 rng(11);
    const auto inst = random_instance(rng, 40, false);
    const Eigen::VectorXd shift = Eigen::VectorXd::Constant(40, 2.7);
    const double a = partial_loglik(0.0, inst.x, kNoOffsets, inst.outcome);
    const double b = partial_loglik(0.0, inst.x, shift, inst.outcome);
    CHECK(a == doctest::Approx(b).epsilon(1e-13));
}

TEST_CASE("matches naive O(n^2) risk-set oracle") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 20 + static_cast<int>(rng() % 180);
        const auto inst = random_instance(rng, n);
        const double fast = partial_loglik(0.3, inst.x, inst.offsets, inst.outcome);
        const double naive = naive_partial_loglik(0.3, inst.x, inst.offsets, inst.outcome);
        CHECK(fast == doctest::Approx(naive).epsilon(1e-12));
    }
}

TEST_CASE("oracle agreement with tied event times") {
    // Ties between events and censorings at the same time.
    const auto outcome = make_outcome({2, 2, 2, 1, 1, 3}, {1, 1, 0, 1, 0, 1});
    Eigen::VectorXd x(6);
    x << 0.5, -0.3, 1.1, 0.0, -0.7, 0.9;
    const double fast = partial_loglik(0.8, x, kNoOffsets, outcome);
    const double naive = naive_partial_loglik(0.8, x, kNoOffsets, outcome);
    CHECK(fast == doctest::Approx(naive).epsilon(1e-13));
}

TEST_CASE("loglik ratio path agrees with two loglik evaluations") {
    std::mt19937 rng(23);
    const auto inst = random_instance(rng, 120);
    const RiskSetOrder order(inst.outcome);
    for (double b : {-0.7, 0.2, 1.5}) {
        const double fused =
            partial_loglik_ratio(b, inst.x, inst.offsets, inst.outcome, order);
        const double direct = partial_loglik(b, inst.x, inst.offsets, inst.outcome) -
                              partial_loglik(0.0, inst.x, inst.offsets, inst.outcome);
        CHECK(fused == doctest::Approx(direct).epsilon(1e-11));
    }
}

TEST_CASE("offset absorption identity") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = random_instance(rng, 60);
        const double b = -1.0 + 0.2 * trial;
        const Eigen::VectorXd absorbed = inst.offsets + b * inst.x;
        const double lhs = partial_loglik(b, inst.x, inst.offsets, inst.outcome);
        const double rhs = partial_loglik(0.0, inst.x, absorbed, inst.outcome);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("score and hessian match finite differences") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 30 + static_cast<int>(rng() % 170);
        const auto inst = random_instance(rng, n);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        const double b = unif(rng);
        const double h = 1e-5 * std::max(1.0, std::abs(b));

        const auto [score, hessian] =
            partial_score_hessian(b, inst.x, inst.offsets, inst.outcome);
        const auto ll = [&](double t) {
            return partial_loglik(t, inst.x, inst.offsets, inst.outcome);
        };
        const auto sc = [&](double t) {
            return partial_score_hessian(t, inst.x, inst.offsets, inst.outcome).first;
        };
        const double fd_score = central_difference(ll, b, h);
        const double fd_hessian = central_difference(sc, b, h);
        CHECK(std::abs(score - fd_score) <= 1e-6 * std::max(1.0, std::abs(score)));
        CHECK(std::abs(hessian - fd_hessian) <= 1e-5 * std::max(1.0, std::abs(hessian)));
        CHECK(hessian <= 0.0);
    }
}

TEST_CASE("constant covariate has zero score and hessian") {
    const auto outcome = make_outcome({1, 2, 3, 4}, {1, 0, 1, 1});
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(4, 3.5);
    for (double b : {0.0, 1.0, -2.0}) {
        const auto [score, hessian] = partial_score_hessian(b, x, kNoOffsets, outcome);
        CHECK(score == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(hessian == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("score is non-increasing in b (concavity)") {
    std::mt19937 rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = random_instance(rng, 80);
        double prev = std::numeric_limits<double>::infinity();
        for (double b : {-2.0, -0.5, 0.0, 0.7, 2.0}) {
            const double score =
                partial_score_hessian(b, inst.x, inst.offsets, inst.outcome).first;
            CHECK(score <= prev + 1e-10);
            prev = score;
        }
    }
}

TEST_CASE("deleting an event removes exactly its information term") {
    std::mt19937 rng(47);
    const auto inst = random_instance(rng, 50);
    Eigen::Index event = -1;
    for (Eigen::Index i = 0; i < 50; ++i)
        if (inst.outcome.status[i] == 1 && event < 0 && i > 0) event = i;
    REQUIRE(event >= 0);

    const Eigen::VectorXd offs =
        inst.offsets.size() ? inst.offsets : Eigen::VectorXd::Zero(50);
    const double info_before =
        -partial_score_hessian(0.0, inst.x, offs, inst.outcome).second;
    SurvivalOutcome flipped = inst.outcome;
    flipped.status[event] = 0;
    const double info_after = -partial_score_hessian(0.0, inst.x, offs, flipped).second;
    const double removed = naive_event_information(0.0, event, inst.x, offs, inst.outcome);
    CHECK(info_after <= info_before + 1e-12);
    CHECK(info_before - info_after == doctest::Approx(removed).epsilon(1e-9));
}

TEST_CASE("newton fit matches golden-section search") {
    std::mt19937 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 40 + static_cast<int>(rng() % 160);
        const auto inst = random_instance(rng, n);
        const auto fit = fit_univariate(inst.x, inst.offsets, inst.outcome);
        REQUIRE(fit.converged);
        const auto ll = [&](double b) {
            return partial_loglik(b, inst.x, inst.offsets, inst.outcome);
        };
        const double oracle = golden_section_max(ll, -10.0, 10.0, 1e-9);
        CHECK(std::abs(fit.bhat - oracle) <= 1e-6);
        CHECK(fit.log_lr >= -1e-10);
        CHECK(fit.se > 0.0);
    }
}

TEST_CASE("degenerate covariate yields flagged fit") {
    const auto outcome = make_outcome({1, 2, 3, 4}, {1, 1, 0, 1});
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(4, 1.0);
    const auto fit = fit_univariate(x, kNoOffsets, outcome);
    CHECK_FALSE(fit.converged);
    CHECK(fit.bhat == 0.0);
    CHECK(fit.log_lr == 0.0);
    CHECK(std::isinf(fit.se));
}

TEST_CASE("input validation") {
    const auto outcome = make_outcome({1, 2, 3}, {1, 1, 0});
    Eigen::VectorXd x(3);
    x << 1, 2, 3;

    SUBCASE("non-finite covariate") {
        Eigen::VectorXd bad = x;
        bad[1] = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(partial_loglik(0.0, bad, kNoOffsets, outcome),
                        InvalidArgumentError);
    }
    SUBCASE("non-finite coefficient") {
        CHECK_THROWS_AS(
            partial_loglik(std::numeric_limits<double>::infinity(), x, kNoOffsets, outcome),
            InvalidArgumentError);
    }
    SUBCASE("zero events") {
        const auto censored = make_outcome({1, 2, 3}, {0, 0, 0});
        CHECK_THROWS_AS(partial_loglik(0.0, x, kNoOffsets, censored),
                        DegenerateDataError);
    }
    SUBCASE("length mismatch") {
        Eigen::VectorXd short_x(2);
        short_x << 1, 2;
        CHECK_THROWS_AS(partial_loglik(0.0, short_x, kNoOffsets, outcome), DimensionError);
    }
}

TEST_CASE("multivariate fit") {
    std::mt19937 rng(59);
    const int n = 150;
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd Z(n, 3);
    SurvivalOutcome outcome;
    outcome.times.resize(n);
    outcome.status.resize(n);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) Z(i, j) = normal(rng);
        const double rate = std::exp(0.4 * Z(i, 0) - 0.2 * Z(i, 1));
        std::exponential_distribution<double> event_time(rate);
        const double t = event_time(rng);
        const double c = -std::log(unif(rng)) * 2.0;
        outcome.times[i] = std::min(t, c);
        outcome.status[i] = t <= c ? 1 : 0;
    }
    outcome.status[0] = 1;

    SUBCASE("single column agrees with univariate fit") {
        const auto multi = fit_multivariate(Z.col(0), outcome);
        const auto uni = fit_univariate(Z.col(0), kNoOffsets, outcome);
        REQUIRE(multi.converged);
        REQUIRE(uni.converged);
        CHECK(multi.coefficients[0] == doctest::Approx(uni.bhat).epsilon(1e-8));
    }
    SUBCASE("gradient vanishes at the optimum") {
        const auto multi = fit_multivariate(Z, outcome);
        REQUIRE(multi.converged);
        // First-order optimality, column by column against the fitted
        // offsets of the remaining coefficients.
        for (int j = 0; j < 3; ++j) {
            Eigen::VectorXd others = multi.linear_predictor - multi.coefficients[j] * Z.col(j);
            const auto [score, hess] =
                partial_score_hessian(multi.coefficients[j], Z.col(j), others, outcome);
            CHECK(std::abs(score) <= 1e-8);
        }
    }
    SUBCASE("duplicated column is singular") {
        Eigen::MatrixXd dup(n, 2);
        dup.col(0) = Z.col(0);
        dup.col(1) = Z.col(0);
        CHECK_THROWS_AS(fit_multivariate(dup, outcome), SingularDesignError);
    }
    SUBCASE("constant column is singular after centering") {
        Eigen::MatrixXd bad(n, 2);
        bad.col(0) = Z.col(0);
        bad.col(1) = Eigen::VectorXd::Constant(n, 1.0);
        CHECK_THROWS_AS(fit_multivariate(bad, outcome), SingularDesignError);
    }
}
