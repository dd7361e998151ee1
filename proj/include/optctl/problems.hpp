#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "optctl/differentiation.hpp"
#include "optctl/linalg.hpp"

namespace optctl {

enum class ConvexityClass {
    StrictlyConvexQuadratic,
    StrictlyConvex,
    SingularHessianPoint,
    Nonconvex,
};

/// A named objective with analytic derivatives, a recommended start, and
/// (when available) the exact minimizer for error tracking.
struct ProblemSpec {
    std::string name;
    ObjectiveOracle oracle;
    std::optional<Vector> known_minimizer;
    Vector recommended_x0{0.0};
    ConvexityClass convexity_class = ConvexityClass::StrictlyConvex;
};

/// f = ½xᵀQx + bᵀx with analytic gradient, Hessian, Hessian diagonal, and
/// minimizer −Q⁻¹b. Throws SingularMatrix via the solve if Q fails PD.
ProblemSpec make_quadratic(const DenseMatrix& Q, const Vector& b);

/// The two-dimensional banana function 100(x₂−x₁²)² + (1−x₁)², minimizer
/// (1,1), standard start (−1.2, 1).
ProblemSpec make_rosenbrock();

/// f = ¼x₁⁴ + x₁ + x₂² whose Hessian diag(3x₁², 2) is exactly singular on
/// the slice x₁ = 0 while the gradient there is nonzero; minimizer (−1, 0),
/// recommended start (0, 1) on the singular slice.
ProblemSpec make_singular_quartic();

/// Ridge-regularized logistic loss over a fixed 8-sample, 2-feature dataset
/// (λ = 0.1). Strictly convex, non-quadratic; the minimizer is computed at
/// construction by Newton to |∇f| ≤ 1e-12 and stored.
ProblemSpec make_logistic();

/// Seeded random strictly convex quadratic with eigenvalues in [0.5, 10].
ProblemSpec make_random_quadratic(int n, std::uint64_t seed);

/// Names resolvable by lookup_problem, in listing order.
std::vector<std::string> problem_names();

/// Resolve a catalog name; `seed` matters only for the randomized entries.
/// Throws ValidationError for unknown names.
ProblemSpec lookup_problem(const std::string& name, std::uint64_t seed = 0);

}  // namespace optctl
