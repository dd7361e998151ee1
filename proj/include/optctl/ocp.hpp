#pragma once

#include <vector>

#include "optctl/linalg.hpp"

namespace optctl {

/// Finite-horizon control problem over increments u_k:
///   minimize  Σ_{k=0}^{N} [f(x_k) + ½u_kᵀR u_k] + f(x_{N+1})
///   subject to x_{k+1} = x_k + u_k
/// with quadratic objective f(x) = ½xᵀQx + bᵀx, Q and R symmetric PD.
struct LqOcpProblem {
    DenseMatrix Q;
    Vector b;
    DenseMatrix R;
    int N = 0;
    Vector x0;
};

struct LqOcpSolution {
    std::vector<Vector> controls;  // u_0 .. u_N
    std::vector<Vector> states;    // x_0 .. x_{N+1}
    std::vector<Vector> costates;  // p_0 .. p_N
    double cost = 0.0;
};

/// Residuals of the optimality conditions:
///   u_k = −R⁻¹ Σ_{i=k+1}^{N+1} ∇f(x_i),
///   p_{k−1} = p_k + ∇f(x_k),  p_N = ∇f(x_{N+1}).
struct ControlLawReport {
    std::vector<double> control_residuals;  // per k
    std::vector<double> costate_residuals;  // per recursion step
    double boundary_residual = 0.0;
    double max_residual() const;
};

/// Throws ValidationError unless Q, R are symmetric PD and shapes agree.
void validate_problem(const LqOcpProblem& prob);

/// Unique minimizer via the stacked normal equations in the (N+1)·n control
/// unknowns, assembled analytically from Q, R, b.
LqOcpSolution solve_lq_exact(const LqOcpProblem& prob);

/// Residual report for a candidate solution against the optimality
/// conditions above.
ControlLawReport verify_control_law(const LqOcpProblem& prob, const LqOcpSolution& sol);

/// Independent check: the same normal equations assembled numerically by
/// difference-probing the rolled-out cost functional, never reading Q, R, b
/// directly. Throws TooLarge beyond (N+1)·n > 64.
LqOcpSolution brute_force_lq(const LqOcpProblem& prob);

/// Cost functional evaluated on an explicit control sequence.
double evaluate_cost(const LqOcpProblem& prob, const std::vector<Vector>& controls);

}  // namespace optctl
