#include "cjdesign/covgen.hpp"
#include "cjdesign/errors.hpp"
#include "cjdesign/exact_design.hpp"
#include "cjdesign/scheduler.hpp"

#include "test_helpers.hpp"

#include "doctest.h"

#include <cmath>
#include <limits>

using namespace cjdesign;

TEST_SUITE("scheduler") {

TEST_CASE("kl_divergence examples") {
    const SchedulingDistribution s(2, Eigen::VectorXd::Constant(1, 1.0));
    CHECK(kl_divergence(s, s) == 0.0);

    // three pairs (N=3) so that zeros are possible
    const SchedulingDistribution point(3, Eigen::Vector3d(1.0, 0.0, 0.0));
    const SchedulingDistribution half(3, Eigen::Vector3d(0.5, 0.5, 0.0));
    CHECK(kl_divergence(point, half) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(kl_divergence(point, half) == doctest::Approx(0.693147).epsilon(1e-6));
    CHECK(kl_divergence(half, point) == std::numeric_limits<double>::infinity());

    const SchedulingDistribution other(4, Eigen::VectorXd::Constant(6, 1.0 / 6.0));
    CHECK_THROWS_AS((void)kl_divergence(point, other), std::invalid_argument);
}

TEST_CASE("kl_divergence matches the textbook sum and is nonnegative") {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> unif(0.01, 1.0);
    for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd a(10);
        Eigen::VectorXd b(10);
        for (Index r = 0; r < 10; ++r) {
            a[r] = unif(rng);
            b[r] = unif(rng);
        }
        a /= a.sum();
        b /= b.sum();
        const SchedulingDistribution sa(5, a);
        const SchedulingDistribution sb(5, b);
        double textbook = 0.0;
        for (Index r = 0; r < 10; ++r) {
            textbook += a[r] * std::log(a[r] / b[r]);
        }
        const double kl = kl_divergence(sa, sb);
        CHECK(kl >= 0.0);
        CHECK(kl == doctest::Approx(textbook).epsilon(1e-10));
    }
}

TEST_CASE("approx_schedule matches exact designs") {
    SUBCASE("identity N=8 is uniform") {
        const auto s = approx_schedule(PriorSpec::centered(Eigen::MatrixXd::Identity(8, 8)));
        CHECK((s.probs().array() - 1.0 / 28.0).abs().maxCoeff() < 1e-12);
    }
    SUBCASE("N=2") {
        const auto s = approx_schedule(PriorSpec::centered(Eigen::MatrixXd::Identity(2, 2)));
        CHECK(s.probs()[0] == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("Laplacian G(8, 0.5)") {
        const auto spec = PriorSpec::centered(laplacian_covariance(erdos_renyi(8, 0.5, 7)));
        const auto exact = exact_schedule(spec);
        const auto approx = approx_design(spec);
        CHECK(kl_divergence(exact, approx.schedule) < 1e-12);
        CHECK(approx.dim == 7);
        CHECK(approx.warnings.empty());
        CHECK(testing::max_abs(approx.schedule.probs() - closed_form_schedule(spec).probs()) < 1e-13);
    }
    SUBCASE("truncated basis matches the reduced pair variances") {
        // q~_r = (Y Y^T Delta Y Y^T)_rr / trace: check against a dense oracle
        std::mt19937_64 rng(6);
        const Index n = 9;
        const Eigen::MatrixXd c = testing::random_spd(n, rng);
        RbdConfig cfg;
        cfg.d_max = 4;
        const auto b = rbd(DiffOperator(n), cfg);
        const Eigen::MatrixXd proj = b.basis * b.basis.transpose();
        const Eigen::MatrixXd reduced = proj * testing::dense_delta(c) * proj;
        const Eigen::VectorXd expected = reduced.diagonal() / reduced.trace();
        const auto s = approx_schedule(PriorSpec::centered(c), cfg);
        CHECK(testing::max_abs(s.probs() - expected) < 1e-13);
    }
    SUBCASE("degenerate prior") {
        CHECK_THROWS_AS((void)approx_schedule(PriorSpec::centered(Eigen::MatrixXd::Ones(6, 6))), DegeneratePriorError);
    }
}

TEST_CASE("sample_pairs") {
    SUBCASE("uniform N=4 frequencies within four standard deviations") {
        const SchedulingDistribution s(4, Eigen::VectorXd::Constant(6, 1.0 / 6.0));
        const Index draws = 60000;
        const auto pairs = sample_pairs(s, draws, 123);
        REQUIRE(static_cast<Index>(pairs.size()) == draws);
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(6);
        for (const auto& p : pairs) {
            CHECK(p.i < p.j);
            CHECK(pair_to_index(p.i, p.j, 4) == p.r);
            counts[p.r - 1] += 1.0;
        }
        const double mean = draws / 6.0;
        const double sd = std::sqrt(draws * (1.0 / 6.0) * (5.0 / 6.0));
        CHECK((counts.array() - mean).abs().maxCoeff() < 4.0 * sd);
    }
    SUBCASE("point mass") {
        Eigen::VectorXd q = Eigen::VectorXd::Zero(6);
        q[4] = 1.0;
        for (const auto& p : sample_pairs(SchedulingDistribution(4, q), 500, 9)) {
            CHECK(p == PairIndex{2, 4, 5});
        }
    }
    SUBCASE("seed determinism") {
        const auto s = closed_form_schedule(PriorSpec::centered(toeplitz_covariance(6)));
        CHECK(sample_pairs(s, 200, 5) == sample_pairs(s, 200, 5));
        CHECK(sample_pairs(s, 200, 5) != sample_pairs(s, 200, 6));
        CHECK(sample_pairs(s, 0, 5).empty());
    }
}

}
