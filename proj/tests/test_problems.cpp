#include <cmath>
#include <random>

#include "doctest.h"

#include "optctl/problems.hpp"
#include "optctl/random_matrices.hpp"
#include "optctl/steppers.hpp"

using namespace optctl;

namespace {

std::vector<ProblemSpec> full_catalog() {
    std::vector<ProblemSpec> specs;
    for (const std::string& name : problem_names()) specs.push_back(lookup_problem(name, 5));
    return specs;
}

}  // namespace

TEST_SUITE("problems") {

TEST_CASE("quadratic factory produces consistent minimizers") {
    SUBCASE("identity") {
        const ProblemSpec p = make_quadratic(DenseMatrix::identity(2), Vector::zeros(2));
        CHECK(p.known_minimizer->max_abs() == 0.0);
    }
    SUBCASE("ill-conditioned diagonal") {
        const ProblemSpec p =
            make_quadratic(DenseMatrix{{1.0, 0.0}, {0.0, 1e4}}, Vector::zeros(2));
        CHECK(p.known_minimizer->max_abs() == 0.0);
        CHECK(p.oracle.hessian(Vector::zeros(2))(1, 1) == 1e4);
    }
    SUBCASE("shifted minimizer solved by hand") {
        // diag(2,3)·x = (2,3) gives x = (1,1).
        const ProblemSpec p =
            make_quadratic(DenseMatrix{{2.0, 0.0}, {0.0, 3.0}}, Vector{-2.0, -3.0});
        CHECK((*p.known_minimizer - Vector{1.0, 1.0}).max_abs() <= 1e-14);
    }
    SUBCASE("a matrix that is not positive definite is rejected") {
        CHECK_THROWS_AS(make_quadratic(DenseMatrix{{1.0, 0.0}, {0.0, -1.0}}, Vector::zeros(2)),
                        SingularMatrix);
        CHECK_THROWS_AS(make_quadratic(DenseMatrix{{1.0, 1.0}, {1.0, 1.0}}, Vector::zeros(2)),
                        SingularMatrix);
    }
}

TEST_CASE("rosenbrock values at the landmarks") {
    const ProblemSpec p = make_rosenbrock();
    CHECK(p.oracle.value(Vector{1.0, 1.0}) == 0.0);
    CHECK(p.oracle.gradient(Vector{1.0, 1.0}).max_abs() == 0.0);
    const DenseMatrix h = p.oracle.hessian(Vector{1.0, 1.0});
    CHECK(h(0, 0) == 802.0);
    CHECK(h(0, 1) == -400.0);
    CHECK(h(1, 1) == 200.0);
    CHECK(p.oracle.value(Vector{-1.2, 1.0}) == doctest::Approx(24.2).epsilon(1e-14));
}

TEST_CASE("singular quartic is singular exactly on the slice") {
    const ProblemSpec p = make_singular_quartic();
    const DenseMatrix h = p.oracle.hessian(Vector{0.0, 7.0});
    CHECK(h(0, 0) == 0.0);
    CHECK(h(1, 1) == 2.0);
    const Vector g = p.oracle.gradient(Vector{0.0, 1.0});
    CHECK(g[0] == 1.0);
    CHECK(g[1] == 2.0);
    CHECK(p.oracle.gradient(Vector{-1.0, 0.0}).max_abs() == 0.0);

    // The contrast the catalog exists for: Newton dies on the slice, the
    // inverse-free stepper does not.
    CHECK_THROWS_AS(newton_step(p.oracle, Vector{0.0, 1.0}), SingularMatrix);
    const StepperConfig cfg =
        default_parameters(p.oracle, Vector{0.0, 1.0}, Algorithm::AlgIIRecursive);
    CHECK(alg2_recursive_step(p.oracle, Vector{0.0, 1.0}, 0, cfg).all_finite());
}

TEST_CASE("logistic problem landmarks") {
    const ProblemSpec p = make_logistic();
    CHECK(p.oracle.value(Vector::zeros(2)) ==
          doctest::Approx(8.0 * std::log(2.0)).epsilon(1e-14));
    CHECK(p.oracle.gradient(*p.known_minimizer).norm() <= 1e-12);

    // Ridge term keeps the Hessian uniformly positive definite.
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const Vector x = random_vector(rng, 2, -2.0, 2.0);
        const DenseMatrix h = p.oracle.hessian(x);
        const DenseMatrix shifted =
            h - DenseMatrix::scaled_identity(2, 0.1) + DenseMatrix::scaled_identity(2, 1e-12);
        CHECK(is_symmetric_pd(shifted, 1e-10));
    }
}

TEST_CASE("every catalog minimizer is stationary") {
    for (const ProblemSpec& p : full_catalog()) {
        REQUIRE(p.known_minimizer.has_value());
        CHECK(p.oracle.gradient(*p.known_minimizer).norm() <= 1e-10);
        CHECK(p.recommended_x0.size() == p.oracle.dimension);
    }
}

TEST_CASE("analytic derivatives agree with finite differences everywhere") {
    std::mt19937_64 rng(42);
    for (const ProblemSpec& p : full_catalog()) {
        const int n = p.oracle.dimension;
        for (int trial = 0; trial < 50; ++trial) {
            const Vector x = random_vector(rng, n, -2.0, 2.0);

            const Vector g = p.oracle.gradient(x);
            const Vector g_fd = fd_gradient(p.oracle, x);
            CHECK((g - g_fd).max_abs() <= 1e-6 * (1.0 + g.max_abs()));

            const DenseMatrix h = p.oracle.hessian(x);
            const DenseMatrix h_fd = fd_hessian(p.oracle, x);
            CHECK((h - h_fd).max_abs() <= 1e-4 * (1.0 + h.max_abs()));
            CHECK((h - h.transpose()).max_abs() <= 1e-12 * (1.0 + h.max_abs()));

            const Vector diag = p.oracle.hessian_diag(x);
            CHECK((diag - h.diagonal_vector()).max_abs() <= 1e-12 * (1.0 + h.max_abs()));
        }
    }
}

TEST_CASE("catalog lookups are deterministic in the seed") {
    const ProblemSpec a = lookup_problem("quadratic-random-3", 9);
    const ProblemSpec b = lookup_problem("quadratic-random-3", 9);
    const ProblemSpec c = lookup_problem("quadratic-random-3", 10);
    const Vector x = Vector::ones(3);
    CHECK((a.oracle.hessian(x) - b.oracle.hessian(x)).max_abs() == 0.0);
    CHECK((a.oracle.hessian(x) - c.oracle.hessian(x)).max_abs() > 0.0);
}

TEST_CASE("unknown names are rejected") {
    CHECK_THROWS_AS(lookup_problem("no-such-problem", 0), ValidationError);
}

}  // TEST_SUITE
