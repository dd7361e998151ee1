#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "optctl/linalg.hpp"

namespace optctl {

/// Callbacks describing one objective. `value` and `gradient` are required;
/// `hessian` and `hessian_diag` may be empty, in which case consumers fall
/// back to finite differences. Oracles must be reentrant.
struct ObjectiveOracle {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    std::function<DenseMatrix(const Vector&)> hessian;    // optional
    std::function<Vector(const Vector&)> hessian_diag;    // optional
    int dimension = 0;
    std::optional<Vector> known_minimizer;
};

/// Consecutive iterates with their gradients, the raw material of the
/// backward-difference Jacobian.
struct DifferencePair {
    Vector x_prev;
    Vector grad_prev;
    Vector x_curr;
    Vector grad_curr;
};

/// Backward-difference Jacobian plus the columns that had to be replaced by
/// identity columns because the corresponding coordinate barely moved.
struct GuardedJacobian {
    DenseMatrix d1;
    std::vector<int> guarded_columns;
};

/// Base step for all finite differences; the per-coordinate step is
/// h·(1+|xᵢ|).
inline constexpr double kDefaultFdStep = 1e-5;

/// Guard below which a coordinate difference is treated as degenerate in
/// backward_difference_jacobian.
inline constexpr double kDefaultDifferenceGuard = 1e-12;

/// Central-difference gradient, per-coordinate step h·(1+|xᵢ|).
Vector fd_gradient(const ObjectiveOracle& oracle, const Vector& x, double h = kDefaultFdStep);

/// Central differences of the oracle gradient, symmetrized as (J+Jᵀ)/2.
DenseMatrix fd_hessian(const ObjectiveOracle& oracle, const Vector& x, double h = kDefaultFdStep);

/// Entrywise [(∇fᵢ(x_k) − ∇fᵢ(x_{k−1}))/(x_{j,k} − x_{j,k−1})]. Columns whose
/// denominator magnitude is below `guard` become identity columns and are
/// reported; throws AllColumnsDegenerate when that happens to every column.
GuardedJacobian backward_difference_jacobian(const DifferencePair& pair,
                                             double guard = kDefaultDifferenceGuard);

/// Diagonal of the Hessian: the oracle's hessian_diag callback when present,
/// otherwise second central differences of the objective value.
Vector hessian_diagonal(const ObjectiveOracle& oracle, const Vector& x,
                        double h = kDefaultFdStep);

/// The oracle's analytic Hessian when present, fd_hessian otherwise.
DenseMatrix oracle_hessian(const ObjectiveOracle& oracle, const Vector& x);

/// Gradient via the oracle with a finiteness check.
Vector oracle_gradient(const ObjectiveOracle& oracle, const Vector& x);

/// Objective value via the oracle with a finiteness check.
double oracle_value(const ObjectiveOracle& oracle, const Vector& x);

}  // namespace optctl
