#include "optctl/problems.hpp"

#include <array>
#include <cmath>

#include "optctl/random_matrices.hpp"

namespace optctl {

namespace {

// Local Newton refinement used to certify constructed minimizers.
Vector newton_refine(const ObjectiveOracle& oracle, Vector x, double tol, int max_iter) {
    for (int it = 0; it < max_iter; ++it) {
        const Vector g = oracle.gradient(x);
        if (g.norm() <= tol) break;
        x = x - lu_solve(oracle.hessian(x), g);
    }
    return x;
}

}  // namespace

ProblemSpec make_quadratic(const DenseMatrix& Q, const Vector& b) {
    const int n = b.size();
    if (!is_symmetric_pd(Q, 1e-10))
        throw SingularMatrix("make_quadratic: Q must be symmetric positive definite");
    const Vector minimizer = lu_solve(Q, b * -1.0);

    ObjectiveOracle oracle;
    oracle.dimension = n;
    oracle.value = [Q, b](const Vector& x) { return 0.5 * x.dot(Q * x) + b.dot(x); };
    oracle.gradient = [Q, b](const Vector& x) { return Q * x + b; };
    oracle.hessian = [Q](const Vector&) { return Q; };
    oracle.hessian_diag = [Q](const Vector&) { return Q.diagonal_vector(); };
    oracle.known_minimizer = minimizer;

    ProblemSpec spec;
    spec.name = "quadratic";
    spec.oracle = std::move(oracle);
    spec.known_minimizer = minimizer;
    spec.recommended_x0 = minimizer + Vector::ones(n);
    spec.convexity_class = ConvexityClass::StrictlyConvexQuadratic;
    return spec;
}

ProblemSpec make_rosenbrock() {
    ObjectiveOracle oracle;
    oracle.dimension = 2;
    oracle.value = [](const Vector& x) {
        const double a = x[1] - x[0] * x[0];
        const double c = 1.0 - x[0];
        return 100.0 * a * a + c * c;
    };
    oracle.gradient = [](const Vector& x) {
        const double a = x[1] - x[0] * x[0];
        return Vector{-400.0 * x[0] * a - 2.0 * (1.0 - x[0]), 200.0 * a};
    };
    oracle.hessian = [](const Vector& x) {
        return DenseMatrix{{1200.0 * x[0] * x[0] - 400.0 * x[1] + 2.0, -400.0 * x[0]},
                           {-400.0 * x[0], 200.0}};
    };
    oracle.hessian_diag = [](const Vector& x) {
        return Vector{1200.0 * x[0] * x[0] - 400.0 * x[1] + 2.0, 200.0};
    };
    oracle.known_minimizer = Vector{1.0, 1.0};

    ProblemSpec spec;
    spec.name = "rosenbrock";
    spec.oracle = std::move(oracle);
    spec.known_minimizer = Vector{1.0, 1.0};
    spec.recommended_x0 = Vector{-1.2, 1.0};
    spec.convexity_class = ConvexityClass::Nonconvex;
    return spec;
}

ProblemSpec make_singular_quartic() {
    ObjectiveOracle oracle;
    oracle.dimension = 2;
    oracle.value = [](const Vector& x) {
        return 0.25 * x[0] * x[0] * x[0] * x[0] + x[0] + x[1] * x[1];
    };
    oracle.gradient = [](const Vector& x) {
        return Vector{x[0] * x[0] * x[0] + 1.0, 2.0 * x[1]};
    };
    oracle.hessian = [](const Vector& x) {
        return DenseMatrix{{3.0 * x[0] * x[0], 0.0}, {0.0, 2.0}};
    };
    oracle.hessian_diag = [](const Vector& x) { return Vector{3.0 * x[0] * x[0], 2.0}; };
    oracle.known_minimizer = Vector{-1.0, 0.0};

    ProblemSpec spec;
    spec.name = "singular-quartic";
    spec.oracle = std::move(oracle);
    spec.known_minimizer = Vector{-1.0, 0.0};
    spec.recommended_x0 = Vector{0.0, 1.0};
    spec.convexity_class = ConvexityClass::SingularHessianPoint;
    return spec;
}

ProblemSpec make_logistic() {
    // Fixed design: 8 samples, 2 features, labels ±1, ridge λ = 0.1.
    static constexpr std::array<std::array<double, 2>, 8> kA = {{{1.0, 0.5},
                                                                 {-0.7, 1.2},
                                                                 {0.9, -1.1},
                                                                 {-1.3, -0.4},
                                                                 {0.3, 0.8},
                                                                 {-0.5, -1.0},
                                                                 {1.4, 0.2},
                                                                 {-0.2, 0.6}}};
    static constexpr std::array<double, 8> kY = {1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0};
    static constexpr double kRidge = 0.1;

    ObjectiveOracle oracle;
    oracle.dimension = 2;
    oracle.value = [](const Vector& x) {
        double f = 0.5 * kRidge * (x[0] * x[0] + x[1] * x[1]);
        for (std::size_t i = 0; i < kA.size(); ++i) {
            const double margin = kY[i] * (kA[i][0] * x[0] + kA[i][1] * x[1]);
            f += std::log1p(std::exp(-margin));
        }
        return f;
    };
    oracle.gradient = [](const Vector& x) {
        Vector g{kRidge * x[0], kRidge * x[1]};
        for (std::size_t i = 0; i < kA.size(); ++i) {
            const double margin = kY[i] * (kA[i][0] * x[0] + kA[i][1] * x[1]);
            const double w = -kY[i] / (1.0 + std::exp(margin));
            g[0] += w * kA[i][0];
            g[1] += w * kA[i][1];
        }
        return g;
    };
    oracle.hessian = [](const Vector& x) {
        DenseMatrix h{{kRidge, 0.0}, {0.0, kRidge}};
        for (std::size_t i = 0; i < kA.size(); ++i) {
            const double margin = kY[i] * (kA[i][0] * x[0] + kA[i][1] * x[1]);
            const double s = 1.0 / (1.0 + std::exp(-margin));
            const double w = s * (1.0 - s);
            h(0, 0) += w * kA[i][0] * kA[i][0];
            h(0, 1) += w * kA[i][0] * kA[i][1];
            h(1, 0) += w * kA[i][1] * kA[i][0];
            h(1, 1) += w * kA[i][1] * kA[i][1];
        }
        return h;
    };
    oracle.hessian_diag = [hess = oracle.hessian](const Vector& x) {
        return hess(x).diagonal_vector();
    };

    const Vector minimizer = newton_refine(oracle, Vector::zeros(2), 1e-13, 50);
    oracle.known_minimizer = minimizer;

    ProblemSpec spec;
    spec.name = "logistic-ridge";
    spec.oracle = std::move(oracle);
    spec.known_minimizer = minimizer;
    spec.recommended_x0 = Vector::zeros(2);
    spec.convexity_class = ConvexityClass::StrictlyConvex;
    return spec;
}

ProblemSpec make_random_quadratic(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0xa5a5a5a55a5a5a5aULL);
    const DenseMatrix q = random_spd(rng, n, 0.5, 10.0);
    const Vector b = random_vector(rng, n, -2.0, 2.0);
    ProblemSpec spec = make_quadratic(q, b);
    spec.name = "quadratic-random-" + std::to_string(n);
    return spec;
}

std::vector<std::string> problem_names() {
    return {"quadratic-diag-2-3", "quadratic-illcond-1e4", "quadratic-random-2",
            "quadratic-random-3", "rosenbrock",            "singular-quartic",
            "logistic-ridge"};
}

ProblemSpec lookup_problem(const std::string& name, std::uint64_t seed) {
    if (name == "quadratic-diag-2-3") {
        ProblemSpec spec = make_quadratic(DenseMatrix{{2.0, 0.0}, {0.0, 3.0}}, Vector{-2.0, -3.0});
        spec.name = name;
        // Distinct coordinate errors so no single mode dominates from the start.
        spec.recommended_x0 = Vector{-1.0, 2.5};
        return spec;
    }
    if (name == "quadratic-illcond-1e4") {
        ProblemSpec spec = make_quadratic(DenseMatrix{{1.0, 0.0}, {0.0, 1e4}}, Vector{0.0, 0.0});
        spec.name = name;
        spec.recommended_x0 = Vector{1.0, 1.0};
        return spec;
    }
    if (name == "quadratic-random-2") return make_random_quadratic(2, seed);
    if (name == "quadratic-random-3") return make_random_quadratic(3, seed);
    if (name == "rosenbrock") return make_rosenbrock();
    if (name == "singular-quartic") return make_singular_quartic();
    if (name == "logistic-ridge") return make_logistic();
    throw ValidationError("unknown problem: " + name);
}

}  // namespace optctl
