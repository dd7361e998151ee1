#include <cmath>
#include <future>
#include <random>

#include "doctest.h"

#include "optctl/problems.hpp"
#include "optctl/random_matrices.hpp"
#include "optctl/steppers.hpp"

using namespace optctl;

namespace {

ProblemSpec scalar_quadratic() {
    return make_quadratic(DenseMatrix(1, 1, {1.0}), Vector{0.0});
}

ProblemSpec diag23_quadratic() {
    return make_quadratic(DenseMatrix{{2.0, 0.0}, {0.0, 3.0}}, Vector{0.0, 0.0});
}

StepperConfig alg1_config(double r) {
    StepperConfig cfg;
    cfg.algorithm = Algorithm::AlgI;
    cfg.r_scalar = r;
    return cfg;
}

StepperConfig alg2_config(Algorithm which, double m) {
    StepperConfig cfg;
    cfg.algorithm = which;
    cfg.m_scalar = m;
    return cfg;
}

StepperConfig alg_diag_config(Algorithm which, Vector d) {
    StepperConfig cfg;
    cfg.algorithm = which;
    cfg.D_diag = std::move(d);
    return cfg;
}

}  // namespace

TEST_SUITE("steppers") {

TEST_CASE("gradient descent step is gd_step times the gradient") {
    StepperConfig cfg;
    cfg.algorithm = Algorithm::GradientDescent;
    cfg.gd_step = 0.1;

    const auto scalar = scalar_quadratic();
    CHECK(gradient_descent_step(scalar.oracle, Vector{1.0}, cfg)[0] == doctest::Approx(0.1));
    CHECK(gradient_descent_step(scalar.oracle, Vector{0.0}, cfg).max_abs() == 0.0);

    cfg.gd_step = 0.5;
    const auto diag = diag23_quadratic();
    const Vector g = gradient_descent_step(diag.oracle, Vector{1.0, 1.0}, cfg);
    CHECK(g[0] == doctest::Approx(1.0));
    CHECK(g[1] == doctest::Approx(1.5));
}

TEST_CASE("newton step solves the quadratic in one application") {
    const auto diag = diag23_quadratic();
    const Vector x{0.4, -2.0};
    const Vector d = newton_step(diag.oracle, x);
    CHECK((x - d).max_abs() <= 1e-14);  // minimizer is the origin

    const auto scalar = scalar_quadratic();
    CHECK(newton_step(scalar.oracle, Vector{3.0})[0] == doctest::Approx(3.0));
}

TEST_CASE("newton step fails on the singular slice") {
    const auto quartic = make_singular_quartic();
    CHECK_THROWS_AS(newton_step(quartic.oracle, Vector{0.0, 0.0}), SingularMatrix);
}

TEST_CASE("alg1 scalar steps match the geometric factors") {
    const auto scalar = scalar_quadratic();
    const StepperConfig cfg = alg1_config(1.0);
    // With r = h = 1 the contraction ratio is 1/2; the step at iteration k
    // is [1 − (1/2)^{k+1}]·x.
    CHECK(alg1_step(scalar.oracle, Vector{1.0}, 0, cfg)[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(alg1_step(scalar.oracle, Vector{0.5}, 1, cfg)[0] ==
          doctest::Approx(0.375).epsilon(1e-15));
}

TEST_CASE("alg1 with R = 0 collapses to the newton step") {
    std::mt19937_64 rng(21);
    const StepperConfig cfg = alg1_config(0.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 5);
        const ProblemSpec prob = make_quadratic(random_spd(rng, n, 0.5, 5.0),
                                                random_vector(rng, n, -1.0, 1.0));
        const Vector x = random_vector(rng, n, -2.0, 2.0);
        const Vector a = alg1_step(prob.oracle, x, 3, cfg);
        const Vector nw = newton_step(prob.oracle, x);
        CHECK((a - nw).max_abs() <= 1e-12 * (1.0 + nw.max_abs()));
    }
}

TEST_CASE("alg1 series agrees with the closed form on SPD problems") {
    std::mt19937_64 rng(22);
    for (double r : {0.2, 1.0, 5.0}) {
        const StepperConfig cfg = alg1_config(r);
        for (int trial = 0; trial < 8; ++trial) {
            const int n = 1 + static_cast<int>(rng() % 5);
            const ProblemSpec prob = make_quadratic(random_spd(rng, n, 0.5, 5.0),
                                                    random_vector(rng, n, -1.0, 1.0));
            const Vector x = random_vector(rng, n, -2.0, 2.0);
            for (int k = 0; k <= 10; ++k) {
                const Vector series = alg1_step(prob.oracle, x, k, cfg);
                const Vector closed = alg1_closed_step(prob.oracle, x, k, cfg);
                CHECK((series - closed).max_abs() <= 1e-10 * (1.0 + closed.max_abs()));
            }
        }
    }
}

TEST_CASE("finite horizon steps") {
    const auto scalar = scalar_quadratic();
    StepperConfig cfg;
    cfg.algorithm = Algorithm::FiniteHorizonBackward;
    cfg.r_scalar = 1.0;

    SUBCASE("N = 0 takes the single-term step") {
        cfg.N_horizon = 0;
        CHECK(finite_horizon_step(scalar.oracle, Vector{1.0}, 0, cfg)[0] ==
              doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("k = N reduces to the single-term step at the current point") {
        cfg.N_horizon = 2;
        const Vector at_k2 = finite_horizon_step(scalar.oracle, Vector{0.7}, 2, cfg);
        cfg.N_horizon = 0;
        const Vector single = finite_horizon_step(scalar.oracle, Vector{0.7}, 0, cfg);
        CHECK(at_k2[0] == single[0]);
    }
    SUBCASE("long horizons approach the newton step") {
        cfg.N_horizon = 50;
        const Vector fh = finite_horizon_step(scalar.oracle, Vector{1.0}, 0, cfg);
        const Vector nw = newton_step(scalar.oracle, Vector{1.0});
        CHECK(std::abs(fh[0] - nw[0]) <= 1e-12);
    }
    SUBCASE("stepping past the terminal time is an error") {
        cfg.N_horizon = 2;
        CHECK_THROWS_AS(finite_horizon_step(scalar.oracle, Vector{1.0}, 3, cfg), HorizonExceeded);
    }
}

TEST_CASE("alg2 closed-form scalar steps") {
    const auto scalar = scalar_quadratic();
    const StepperConfig cfg = alg2_config(Algorithm::AlgIIClosed, 0.5);
    CHECK(alg2_closed_step(scalar.oracle, Vector{1.0}, 0, cfg)[0] ==
          doctest::Approx(0.5).epsilon(1e-15));
    CHECK(alg2_closed_step(scalar.oracle, Vector{0.5}, 1, cfg)[0] ==
          doctest::Approx(0.375).epsilon(1e-15));
}

TEST_CASE("alg2 with M = H^-1 is the newton step for every k") {
    std::mt19937_64 rng(23);
    const ProblemSpec prob = make_quadratic(random_spd(rng, 3, 0.5, 4.0),
                                            random_vector(rng, 3, -1.0, 1.0));
    StepperConfig cfg;
    cfg.algorithm = Algorithm::AlgIIClosed;
    const DenseMatrix q = prob.oracle.hessian(Vector::zeros(3));
    cfg.M_matrix = lu_solve(q, DenseMatrix::identity(3));
    const Vector x = random_vector(rng, 3, -2.0, 2.0);
    const Vector nw = newton_step(prob.oracle, x);
    for (int k = 0; k <= 4; ++k) {
        const Vector closed = alg2_closed_step(prob.oracle, x, k, cfg);
        const Vector recur = alg2_recursive_step(prob.oracle, x, k, cfg);
        CHECK((closed - nw).max_abs() <= 1e-11 * (1.0 + nw.max_abs()));
        CHECK((recur - nw).max_abs() <= 1e-11 * (1.0 + nw.max_abs()));
    }
}

TEST_CASE("alg2 recursive matches closed form whenever the contraction is valid") {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 5);
        const DenseMatrix h = random_spd(rng, n, 0.5, 5.0);
        const ProblemSpec prob = make_quadratic(h, random_vector(rng, n, -1.0, 1.0));
        // Random SPD M rescaled so every eigenvalue of M·H lies in (0, 1];
        // then ρ(I − MH) < 1 as the closed/recursive equivalence requires.
        DenseMatrix m = random_spd(rng, n, 0.5, 2.0);
        m = m * (1.0 / spectral_radius(m * h));
        StepperConfig cfg;
        cfg.algorithm = Algorithm::AlgIIRecursive;
        cfg.M_matrix = m;
        const Vector x = random_vector(rng, n, -2.0, 2.0);
        for (int k = 0; k <= 10; ++k) {
            const Vector closed = alg2_closed_step(prob.oracle, x, k, cfg);
            const Vector recur = alg2_recursive_step(prob.oracle, x, k, cfg);
            CHECK((closed - recur).max_abs() <= 1e-11 * (1.0 + closed.max_abs()));
        }
    }
}

TEST_CASE("alg2 recursive handles an exactly singular Hessian") {
    const auto quartic = make_singular_quartic();
    const StepperConfig cfg = alg2_config(Algorithm::AlgIIRecursive, 0.25);
    // At the origin H = diag(0, 2) and ∇f = (1, 0): the first coordinate
    // unrolls to 0.25·(1+1+1+1) = 1 because its contraction factor is 1.
    const Vector g = alg2_recursive_step(quartic.oracle, Vector{0.0, 0.0}, 3, cfg);
    CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g[1] == doctest::Approx(0.0));

    const Vector base = alg2_recursive_step(quartic.oracle, Vector{0.0, 0.0}, 0, cfg);
    CHECK(base[0] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("alg3 base case and scalar secant behaviour") {
    const auto scalar = scalar_quadratic();
    const StepperConfig cfg = alg_diag_config(Algorithm::AlgIII, Vector{0.5});
    Alg3State state;

    const Alg3Step s0 = alg3_step(scalar.oracle, Vector{1.0}, 0, cfg, state);
    CHECK(s0.step[0] == doctest::Approx(0.5).epsilon(1e-15));  // D∇f at k = 0

    // On a scalar quadratic the secant is exact, so k = 1 reproduces the
    // alg2 factor 1 − (1 − 0.5)² = 0.75 of the newton step 0.5.
    const Alg3Step s1 = alg3_step(scalar.oracle, Vector{0.5}, 1, cfg, state);
    CHECK(s1.step[0] == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(s1.guarded_columns.empty());
}

TEST_CASE("alg3 guards a stalled iterate") {
    const auto diag = diag23_quadratic();
    const StepperConfig cfg = alg_diag_config(Algorithm::AlgIII, Vector{0.25, 0.2});
    Alg3State state;
    const Vector x{1.0, 1.0};
    alg3_step(diag.oracle, x, 0, cfg, state);
    state.prev_x = x;  // force x_prev = x_curr
    const Alg3Step s = alg3_step(diag.oracle, x, 1, cfg, state);
    CHECK(s.guarded_columns.size() == 2);
    CHECK(s.step.all_finite());
}

TEST_CASE("alg4 elementwise recursion against the scalar closed form") {
    const auto diag = diag23_quadratic();
    const StepperConfig cfg = alg_diag_config(Algorithm::AlgIV, Vector{0.25, 0.2});
    const Vector x{1.0, 1.0};

    const Vector g0 = alg4_step(diag.oracle, x, 0, cfg);
    CHECK(g0[0] == doctest::Approx(0.5).epsilon(1e-15));   // 0.25·∇f₁ = 0.25·2
    CHECK(g0[1] == doctest::Approx(0.6).epsilon(1e-15));   // 0.2·∇f₂ = 0.2·3

    // Scalar closed form per coordinate: [1 − (1 − dᵢΛᵢ)^{k+1}]·∇fᵢ/Λᵢ.
    const Vector g1 = alg4_step(diag.oracle, x, 1, cfg);
    const double expected0 = (1.0 - std::pow(1.0 - 0.25 * 2.0, 2)) * 2.0 / 2.0;
    const double expected1 = (1.0 - std::pow(1.0 - 0.2 * 3.0, 2)) * 3.0 / 3.0;
    CHECK(g1[0] == doctest::Approx(expected0).epsilon(1e-14));
    CHECK(g1[1] == doctest::Approx(expected1).epsilon(1e-14));
}

TEST_CASE("alg4 with D equal to the inverse diagonal is newton on diagonal quadratics") {
    const auto diag = diag23_quadratic();
    const StepperConfig cfg = alg_diag_config(Algorithm::AlgIV, Vector{0.5, 1.0 / 3.0});
    const Vector x{2.0, -1.5};
    for (int k = 0; k <= 3; ++k) {
        const Vector g = alg4_step(diag.oracle, x, k, cfg);
        CHECK(g[0] == doctest::Approx(x[0]).epsilon(1e-14));
        CHECK(g[1] == doctest::Approx(x[1]).epsilon(1e-14));
    }
}

TEST_CASE("alg4 and alg2 produce identical traces on diagonal problems") {
    const auto diag = diag23_quadratic();
    const Vector d{0.25, 0.2};

    StepperConfig cfg4 = alg_diag_config(Algorithm::AlgIV, d);
    StepperConfig cfg2;
    cfg2.algorithm = Algorithm::AlgIIRecursive;
    cfg2.M_matrix = DenseMatrix::diagonal(d);

    const Vector x0{1.7, -0.9};
    const RunResult r4 = run(diag.oracle, x0, cfg4);
    const RunResult r2 = run(diag.oracle, x0, cfg2);
    REQUIRE(r4.trace.records.size() == r2.trace.records.size());
    for (std::size_t i = 0; i < r4.trace.records.size(); ++i) {
        const Vector diff = r4.trace.records[i].x - r2.trace.records[i].x;
        CHECK(diff.max_abs() <= 1e-12);
    }
}

TEST_CASE("run on the scalar quadratic contracts by exact powers of two") {
    const auto scalar = scalar_quadratic();
    StepperConfig cfg = alg1_config(1.0);
    const RunResult result = run(scalar.oracle, Vector{1.0}, cfg);
    REQUIRE(result.stop.code == StopCode::GradientTolerance);
    const auto& rec = result.trace.records;
    REQUIRE(rec.size() >= 4);
    // Dyadic factors are exact in floating point: 1, 1/2, 1/8, 1/64, ...
    CHECK(rec[0].x[0] == 1.0);
    CHECK(rec[1].x[0] == 0.5);
    CHECK(rec[2].x[0] == 0.125);
    CHECK(rec[3].x[0] == 0.015625);
    for (std::size_t k = 0; k + 1 < rec.size(); ++k) {
        const double expected_ratio = std::pow(0.5, static_cast<double>(k + 1));
        CHECK(rec[k + 1].x[0] / rec[k].x[0] == doctest::Approx(expected_ratio).epsilon(1e-12));
    }
}

TEST_CASE("newton run on a quadratic stops after exactly one iteration") {
    std::mt19937_64 rng(25);
    const ProblemSpec prob = make_quadratic(random_spd(rng, 3, 0.5, 4.0),
                                            random_vector(rng, 3, -1.0, 1.0));
    StepperConfig cfg;
    cfg.algorithm = Algorithm::Newton;
    const RunResult result = run(prob.oracle, prob.recommended_x0, cfg);
    CHECK(result.stop.code == StopCode::GradientTolerance);
    CHECK(result.trace.iterations() == 1);
}

TEST_CASE("gradient descent contracts linearly at the documented rate") {
    const auto scalar = scalar_quadratic();
    StepperConfig cfg;
    cfg.algorithm = Algorithm::GradientDescent;
    cfg.gd_step = 0.1;
    cfg.max_iter = 40;
    cfg.grad_tol = 1e-12;
    const RunResult result = run(scalar.oracle, Vector{1.0}, cfg);
    const auto& rec = result.trace.records;
    for (std::size_t k = 0; k + 1 < rec.size(); ++k)
        CHECK(rec[k + 1].x[0] / rec[k].x[0] == doctest::Approx(0.9).epsilon(1e-13));
}

TEST_CASE("per-iteration contraction identity and rate bound on quadratics") {
    std::mt19937_64 rng(26);
    const DenseMatrix q = random_spd(rng, 3, 0.5, 6.0);
    const ProblemSpec prob = make_quadratic(q, Vector::zeros(3));
    StepperConfig cfg = alg1_config(1.0);
    cfg.max_iter = 20;
    cfg.grad_tol = 1e-300;
    cfg.step_tol = 1e-300;

    const Vector x0 = random_vector(rng, 3, -2.0, 2.0);
    const RunResult result = run(prob.oracle, x0, cfg);
    const DenseMatrix rq = DenseMatrix::identity(3) + q;
    const DenseMatrix contraction = lu_solve(rq, DenseMatrix::identity(3));
    const double rho = spectral_radius(contraction);

    const auto& rec = result.trace.records;
    for (std::size_t k = 0; k + 1 < rec.size(); ++k) {
        const Vector ek = rec[k].x;       // minimizer is the origin
        const Vector ek1 = rec[k + 1].x;
        if (ek.norm() <= 1e-280) break;
        const Vector predicted = matrix_power(contraction, static_cast<int>(k) + 1) * ek;
        CHECK((ek1 - predicted).max_abs() <= 1e-10 * ek.norm());
        // The update x − z cancels to eps·|e_k| noise, so the ρ^{k+1} bound
        // is only resolvable against its 1e-8 slack while ρ^{k+1} ≫ eps/1e-8.
        const double factor = std::pow(rho, static_cast<double>(k + 1));
        if (factor >= 1e-7)
            CHECK(ek1.norm() <= factor * ek.norm() * (1.0 + 1e-8));
    }
}

TEST_CASE("descent is strictly monotone on a strictly convex quadratic") {
    std::mt19937_64 rng(27);
    const ProblemSpec prob = make_quadratic(random_spd(rng, 4, 0.5, 6.0), Vector::zeros(4));
    StepperConfig cfg = alg1_config(2.0);
    const RunResult result = run(prob.oracle, random_vector(rng, 4, -2.0, 2.0), cfg);
    REQUIRE(result.stop.code == StopCode::GradientTolerance);
    const auto& rec = result.trace.records;
    for (std::size_t k = 0; k + 1 < rec.size(); ++k) CHECK(rec[k + 1].f < rec[k].f);
}

TEST_CASE("singular-slice robustness of the inverse-free steppers") {
    const auto quartic = make_singular_quartic();
    const Vector x0{0.0, 1.0};

    CHECK_THROWS_AS(newton_step(quartic.oracle, x0), SingularMatrix);

    const StepperConfig cfg2 = alg2_config(Algorithm::AlgIIRecursive, 0.25);
    CHECK(alg2_recursive_step(quartic.oracle, x0, 2, cfg2).all_finite());

    const StepperConfig cfg3 = alg_diag_config(Algorithm::AlgIII, Vector{0.5, 0.25});
    Alg3State state;
    CHECK(alg3_step(quartic.oracle, x0, 0, cfg3, state).step.all_finite());

    const StepperConfig cfg4 = alg_diag_config(Algorithm::AlgIV, Vector{0.5, 0.25});
    CHECK(alg4_step(quartic.oracle, x0, 2, cfg4).all_finite());
}

TEST_CASE("newton run reports the singular Hessian as a numerical failure") {
    const auto quartic = make_singular_quartic();
    StepperConfig cfg;
    cfg.algorithm = Algorithm::Newton;
    const RunResult result = run(quartic.oracle, Vector{0.0, 1.0}, cfg);
    CHECK(result.stop.code == StopCode::NumericalFailure);
    CHECK(result.stop.detail.find("pivot") != std::string::npos);
    CHECK(result.trace.records.size() == 1);  // partial trace attached
}

TEST_CASE("every trace reconstructs bitwise from its recorded steps") {
    std::mt19937_64 rng(28);
    const ProblemSpec prob = make_quadratic(random_spd(rng, 3, 0.5, 4.0),
                                            random_vector(rng, 3, -1.0, 1.0));
    for (const Algorithm alg : {Algorithm::AlgI, Algorithm::AlgIIRecursive, Algorithm::AlgIII,
                                Algorithm::AlgIV, Algorithm::GradientDescent}) {
        const StepperConfig cfg = default_parameters(prob.oracle, prob.recommended_x0, alg);
        const RunResult res = run(prob.oracle, prob.recommended_x0, cfg);
        const auto& rec = res.trace.records;
        for (std::size_t k = 0; k + 1 < rec.size(); ++k) {
            const Vector reconstructed = rec[k].x - rec[k].step;
            for (int j = 0; j < 3; ++j) CHECK(reconstructed[j] == rec[k + 1].x[j]);
        }
    }
}

TEST_CASE("two identical runs produce bitwise identical traces") {
    const auto diag = diag23_quadratic();
    StepperConfig cfg = alg2_config(Algorithm::AlgIIRecursive, 0.3);
    const RunResult a = run(diag.oracle, Vector{1.3, -0.7}, cfg);
    const RunResult b = run(diag.oracle, Vector{1.3, -0.7}, cfg);
    REQUIRE(a.trace.records.size() == b.trace.records.size());
    for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
        for (int j = 0; j < 2; ++j) {
            CHECK(a.trace.records[i].x[j] == b.trace.records[i].x[j]);
            CHECK(a.trace.records[i].step[j] == b.trace.records[i].step[j]);
        }
        CHECK(a.trace.records[i].f == b.trace.records[i].f);
    }
}

TEST_CASE("horizon cap of one degenerates alg2 to preconditioned descent") {
    const auto diag = diag23_quadratic();
    StepperConfig cfg = alg2_config(Algorithm::AlgIIRecursive, 0.2);
    cfg.horizon_cap = 1;
    cfg.max_iter = 15;
    cfg.grad_tol = 1e-300;
    const RunResult capped = run(diag.oracle, Vector{1.0, 1.0}, cfg);

    Vector x{1.0, 1.0};
    for (std::size_t k = 0; k + 1 < capped.trace.records.size(); ++k) {
        CHECK(capped.trace.records[k].x[0] == x[0]);
        CHECK(capped.trace.records[k].x[1] == x[1]);
        x = x - diag.oracle.gradient(x) * 0.2;  // x − M∇f with M = 0.2·I
    }
}

TEST_CASE("finite horizon run completes the horizon and reports it") {
    const auto scalar = scalar_quadratic();
    StepperConfig cfg;
    cfg.algorithm = Algorithm::FiniteHorizonBackward;
    cfg.r_scalar = 1.0;
    cfg.N_horizon = 3;
    cfg.grad_tol = 1e-300;
    const RunResult result = run(scalar.oracle, Vector{1.0}, cfg);
    CHECK(result.stop.code == StopCode::MaxIterations);
    CHECK(result.stop.detail == "finite horizon complete");
    CHECK(result.trace.records.size() == 5);  // iterates x_0 .. x_4 = x_{N+1}
}

TEST_CASE("step tolerance stops a stalled run") {
    const auto scalar = scalar_quadratic();
    StepperConfig cfg;
    cfg.algorithm = Algorithm::GradientDescent;
    cfg.gd_step = 1e-20;
    const RunResult result = run(scalar.oracle, Vector{1.0}, cfg);
    CHECK(result.stop.code == StopCode::StepTolerance);
    CHECK(result.trace.records.size() == 1);
    CHECK(result.trace.records[0].step[0] == doctest::Approx(1e-20));
}

TEST_CASE("run rejects an x0 of the wrong dimension") {
    const auto diag = diag23_quadratic();
    StepperConfig cfg = alg1_config(1.0);
    CHECK_THROWS_AS(run(diag.oracle, Vector{1.0, 2.0, 3.0}, cfg), ValidationError);
}

TEST_CASE("validate_config demands exactly the algorithm's parameters") {
    SUBCASE("missing required parameter") {
        StepperConfig cfg;
        cfg.algorithm = Algorithm::AlgI;
        CHECK_THROWS_AS(validate_config(cfg, 2), ValidationError);
    }
    SUBCASE("extraneous parameter") {
        StepperConfig cfg = alg1_config(1.0);
        cfg.m_scalar = 0.5;
        CHECK_THROWS_AS(validate_config(cfg, 2), ValidationError);
    }
    SUBCASE("negative scalar R") {
        StepperConfig cfg = alg1_config(-1.0);
        CHECK_THROWS_AS(validate_config(cfg, 2), ValidationError);
    }
    SUBCASE("zero scalar R is the documented degenerate mode") {
        StepperConfig cfg = alg1_config(0.0);
        CHECK_NOTHROW(validate_config(cfg, 2));
    }
    SUBCASE("indefinite matrix M") {
        StepperConfig cfg;
        cfg.algorithm = Algorithm::AlgIIClosed;
        cfg.M_matrix = DenseMatrix{{1.0, 0.0}, {0.0, -1.0}};
        CHECK_THROWS_AS(validate_config(cfg, 2), ValidationError);
    }
    SUBCASE("non-positive D entry") {
        StepperConfig cfg = alg_diag_config(Algorithm::AlgIV, Vector{0.5, 0.0});
        CHECK_THROWS_AS(validate_config(cfg, 2), ValidationError);
    }
    SUBCASE("horizon cap on an uncapped algorithm") {
        StepperConfig cfg;
        cfg.algorithm = Algorithm::Newton;
        cfg.horizon_cap = 3;
        CHECK_THROWS_AS(validate_config(cfg, 2), ValidationError);
    }
    SUBCASE("finite horizon requires N") {
        StepperConfig cfg;
        cfg.algorithm = Algorithm::FiniteHorizonBackward;
        cfg.r_scalar = 1.0;
        CHECK_THROWS_AS(validate_config(cfg, 2), ValidationError);
    }
}

TEST_CASE("default parameters follow the curvature at x0") {
    SUBCASE("unit curvature gives the newton-equivalent scalar M") {
        const auto scalar = scalar_quadratic();
        const StepperConfig cfg =
            default_parameters(scalar.oracle, Vector{1.0}, Algorithm::AlgIIRecursive);
        CHECK(cfg.m_scalar.value() == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("diag(2,3) curvature") {
        const auto diag = diag23_quadratic();
        const StepperConfig cfg2 =
            default_parameters(diag.oracle, Vector{1.0, 1.0}, Algorithm::AlgIIRecursive);
        CHECK(cfg2.m_scalar.value() == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

        const StepperConfig cfg4 =
            default_parameters(diag.oracle, Vector{1.0, 1.0}, Algorithm::AlgIV);
        CHECK(cfg4.D_diag.value()[0] == doctest::Approx(0.25).epsilon(1e-9));
        CHECK(cfg4.D_diag.value()[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
    }
    SUBCASE("flat start hits the guard and the cap") {
        ObjectiveOracle flat;
        flat.dimension = 1;
        flat.value = [](const Vector&) { return 0.0; };
        flat.gradient = [](const Vector&) { return Vector{0.0}; };
        flat.hessian = [](const Vector&) { return DenseMatrix(1, 1, {0.0}); };
        flat.hessian_diag = [](const Vector&) { return Vector{0.0}; };
        const StepperConfig cfg =
            default_parameters(flat, Vector{0.0}, Algorithm::AlgIIRecursive);
        CHECK(cfg.m_scalar.value() == doctest::Approx(1e4));
        const StepperConfig cfg4 = default_parameters(flat, Vector{0.0}, Algorithm::AlgIV);
        CHECK(cfg4.D_diag.value()[0] == doctest::Approx(1e4));
    }
}

TEST_CASE("streaming inner mode matches the base case and still converges") {
    const auto diag = diag23_quadratic();

    StepperConfig unrolled = alg_diag_config(Algorithm::AlgIII, Vector{0.25, 0.2});
    StepperConfig streaming = unrolled;
    streaming.inner_mode = InnerMode::Streaming;

    SUBCASE("k = 0 directions coincide") {
        Alg3State su, ss;
        const Vector x{1.0, -1.0};
        const Vector gu = alg3_step(diag.oracle, x, 0, unrolled, su).step;
        const Vector gs = alg3_step(diag.oracle, x, 0, streaming, ss).step;
        CHECK((gu - gs).max_abs() == 0.0);
    }
    SUBCASE("alg3 streaming run reaches the tolerance") {
        const RunResult res = run(diag.oracle, Vector{1.4, -0.6}, streaming);
        CHECK(res.stop.code == StopCode::GradientTolerance);
    }
    SUBCASE("alg4 streaming run reaches the tolerance") {
        StepperConfig cfg4 = alg_diag_config(Algorithm::AlgIV, Vector{0.25, 0.2});
        cfg4.inner_mode = InnerMode::Streaming;
        const RunResult res = run(diag.oracle, Vector{1.4, -0.6}, cfg4);
        CHECK(res.stop.code == StopCode::GradientTolerance);
    }
}

TEST_CASE("concurrent runs over a shared oracle match serial execution") {
    std::mt19937_64 rng(29);
    const ProblemSpec prob = make_quadratic(random_spd(rng, 3, 0.5, 4.0),
                                            random_vector(rng, 3, -1.0, 1.0));
    const std::vector<Vector> starts = {prob.recommended_x0, Vector{2.0, -1.0, 0.5},
                                        Vector{-0.5, 0.25, 1.5}, Vector{3.0, 3.0, 3.0}};
    const StepperConfig cfg =
        default_parameters(prob.oracle, prob.recommended_x0, Algorithm::AlgIIRecursive);

    std::vector<RunResult> serial;
    for (const Vector& x0 : starts) serial.push_back(run(prob.oracle, x0, cfg));

    std::vector<std::future<RunResult>> jobs;
    for (const Vector& x0 : starts)
        jobs.push_back(std::async(std::launch::async,
                                  [&, x0] { return run(prob.oracle, x0, cfg); }));
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const RunResult concurrent = jobs[i].get();
        REQUIRE(concurrent.trace.records.size() == serial[i].trace.records.size());
        for (std::size_t k = 0; k < concurrent.trace.records.size(); ++k)
            for (int j = 0; j < 3; ++j)
                CHECK(concurrent.trace.records[k].x[j] == serial[i].trace.records[k].x[j]);
    }
}

TEST_CASE("a contraction violation at x0 is a warning, not an error") {
    const auto diag = diag23_quadratic();
    StepperConfig cfg = alg2_config(Algorithm::AlgIIRecursive, 10.0);  // ρ(I−MH) = 29
    cfg.max_iter = 3;
    const RunResult result = run(diag.oracle, Vector{1.0, 1.0}, cfg);
    REQUIRE_FALSE(result.warnings.empty());
    CHECK(result.warnings[0].find(">= 1") != std::string::npos);
}

}  // TEST_SUITE
