#include "optctl/ocp.hpp"

#include <algorithm>
#include <cmath>

namespace optctl {

namespace {

Vector grad_f(const LqOcpProblem& prob, const Vector& x) { return prob.Q * x + prob.b; }

double f_of(const LqOcpProblem& prob, const Vector& x) {
    return 0.5 * x.dot(prob.Q * x) + prob.b.dot(x);
}

std::vector<Vector> rollout(const LqOcpProblem& prob, const std::vector<Vector>& controls) {
    std::vector<Vector> states;
    states.reserve(controls.size() + 1);
    states.push_back(prob.x0);
    for (const Vector& u : controls) states.push_back(states.back() + u);
    return states;
}

std::vector<Vector> unstack(const Vector& stacked, int count, int n) {
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        Vector u = Vector::zeros(n);
        for (int i = 0; i < n; ++i) u[i] = stacked[k * n + i];
        out.push_back(std::move(u));
    }
    return out;
}

LqOcpSolution finish_solution(const LqOcpProblem& prob, std::vector<Vector> controls) {
    LqOcpSolution sol;
    sol.states = rollout(prob, controls);
    sol.controls = std::move(controls);
    sol.cost = evaluate_cost(prob, sol.controls);
    // Costates from the backward recursion p_N = ∇f(x_{N+1}),
    // p_{k−1} = p_k + ∇f(x_k).
    sol.costates.assign(static_cast<std::size_t>(prob.N + 1), Vector::zeros(prob.x0.size()));
    sol.costates[static_cast<std::size_t>(prob.N)] =
        grad_f(prob, sol.states[static_cast<std::size_t>(prob.N + 1)]);
    for (int k = prob.N; k >= 1; --k)
        sol.costates[static_cast<std::size_t>(k - 1)] =
            sol.costates[static_cast<std::size_t>(k)] +
            grad_f(prob, sol.states[static_cast<std::size_t>(k)]);
    return sol;
}

}  // namespace

void validate_problem(const LqOcpProblem& prob) {
    const int n = prob.x0.size();
    if (!prob.Q.square() || prob.Q.rows() != n || !prob.R.square() || prob.R.rows() != n ||
        prob.b.size() != n)
        throw ValidationError("LqOcpProblem: inconsistent dimensions");
    if (prob.N < 0) throw ValidationError("LqOcpProblem: N must be >= 0");
    if (!is_symmetric_pd(prob.Q, 1e-10)) throw ValidationError("LqOcpProblem: Q must be SPD");
    if (!is_symmetric_pd(prob.R, 1e-10)) throw ValidationError("LqOcpProblem: R must be SPD");
}

double evaluate_cost(const LqOcpProblem& prob, const std::vector<Vector>& controls) {
    const std::vector<Vector> states = rollout(prob, controls);
    double cost = 0.0;
    for (int k = 0; k <= prob.N; ++k) {
        cost += f_of(prob, states[static_cast<std::size_t>(k)]);
        cost += 0.5 * controls[static_cast<std::size_t>(k)].dot(
                          prob.R * controls[static_cast<std::size_t>(k)]);
    }
    cost += f_of(prob, states[static_cast<std::size_t>(prob.N + 1)]);
    return cost;
}

LqOcpSolution solve_lq_exact(const LqOcpProblem& prob) {
    validate_problem(prob);
    const int n = prob.x0.size();
    const int blocks = prob.N + 1;
    const int dim = blocks * n;

    // Stationarity of the stacked cost: with x_k = x0 + Σ_{j<k} u_j,
    //   R u_j + Σ_{k=j+1}^{N+1} ∇f(x_k) = 0,
    // which assembles to blocks G_{ji} = w_{ji}·Q + δ_{ji}·R with
    // w_{ji} = N+1−max(i,j) copies of Q, and rhs_j = −(N+1−j)(Q x0 + b).
    DenseMatrix G = DenseMatrix::zeros(dim, dim);
    const Vector grad0 = grad_f(prob, prob.x0);
    Vector rhs = Vector::zeros(dim);
    for (int j = 0; j < blocks; ++j) {
        for (int i = 0; i < blocks; ++i) {
            const double weight = static_cast<double>(prob.N + 1 - std::max(i, j));
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) {
                    double v = weight * prob.Q(r, c);
                    if (i == j) v += prob.R(r, c);
                    G(j * n + r, i * n + c) = v;
                }
        }
        const double count = static_cast<double>(prob.N + 1 - j);
        for (int r = 0; r < n; ++r) rhs[j * n + r] = -count * grad0[r];
    }

    const Vector stacked = lu_solve(G, rhs);
    return finish_solution(prob, unstack(stacked, blocks, n));
}

ControlLawReport verify_control_law(const LqOcpProblem& prob, const LqOcpSolution& sol) {
    ControlLawReport report;
    const int N = prob.N;

    for (int k = 0; k <= N; ++k) {
        Vector sum = Vector::zeros(prob.x0.size());
        for (int i = k + 1; i <= N + 1; ++i)
            sum = sum + grad_f(prob, sol.states[static_cast<std::size_t>(i)]);
        const Vector residual =
            sol.controls[static_cast<std::size_t>(k)] + lu_solve(prob.R, sum);
        report.control_residuals.push_back(residual.max_abs());
    }
    for (int k = N; k >= 1; --k) {
        const Vector residual = sol.costates[static_cast<std::size_t>(k - 1)] -
                                sol.costates[static_cast<std::size_t>(k)] -
                                grad_f(prob, sol.states[static_cast<std::size_t>(k)]);
        report.costate_residuals.push_back(residual.max_abs());
    }
    report.boundary_residual =
        (sol.costates[static_cast<std::size_t>(N)] -
         grad_f(prob, sol.states[static_cast<std::size_t>(N + 1)]))
            .max_abs();
    return report;
}

double ControlLawReport::max_residual() const {
    double m = boundary_residual;
    for (double r : control_residuals) m = std::max(m, r);
    for (double r : costate_residuals) m = std::max(m, r);
    return m;
}

LqOcpSolution brute_force_lq(const LqOcpProblem& prob) {
    validate_problem(prob);
    const int n = prob.x0.size();
    const int blocks = prob.N + 1;
    const int dim = blocks * n;
    if (dim > 64) throw TooLarge("brute_force_lq: (N+1)*n exceeds desk scale 64");

    // The stacked cost is exactly quadratic, so unit-step difference probes
    // of the rolled-out functional recover its Hessian and gradient without
    // truncation error.
    auto cost_at = [&](const Vector& stacked) {
        return evaluate_cost(prob, unstack(stacked, blocks, n));
    };

    const double j0 = cost_at(Vector::zeros(dim));
    std::vector<double> j_plus(static_cast<std::size_t>(dim));
    std::vector<double> j_minus(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        j_plus[static_cast<std::size_t>(i)] = cost_at(Vector::unit(dim, i));
        j_minus[static_cast<std::size_t>(i)] = cost_at(Vector::unit(dim, i) * -1.0);
    }

    DenseMatrix G = DenseMatrix::zeros(dim, dim);
    Vector c = Vector::zeros(dim);
    for (int i = 0; i < dim; ++i) {
        c[i] = (j_plus[static_cast<std::size_t>(i)] - j_minus[static_cast<std::size_t>(i)]) / 2.0;
        G(i, i) = j_plus[static_cast<std::size_t>(i)] + j_minus[static_cast<std::size_t>(i)] -
                  2.0 * j0;
        for (int j = i + 1; j < dim; ++j) {
            const double jij = cost_at(Vector::unit(dim, i) + Vector::unit(dim, j));
            const double gij = jij - j_plus[static_cast<std::size_t>(i)] -
                               j_plus[static_cast<std::size_t>(j)] + j0;
            G(i, j) = gij;
            G(j, i) = gij;
        }
    }

    const Vector stacked = lu_solve(G, c * -1.0);
    return finish_solution(prob, unstack(stacked, blocks, n));
}

}  // namespace optctl
