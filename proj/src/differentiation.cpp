#include "optctl/differentiation.hpp"

#include <cmath>
#include <sstream>

namespace optctl {

namespace {

double checked_value(const ObjectiveOracle& oracle, const Vector& x, const char* where) {
    const double v = oracle.value(x);
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << where << ": objective returned non-finite value";
        throw NonFiniteValue(os.str());
    }
    return v;
}

Vector checked_gradient(const ObjectiveOracle& oracle, const Vector& x, const char* where) {
    Vector g = oracle.gradient(x);
    if (!g.all_finite()) {
        std::ostringstream os;
        os << where << ": gradient returned non-finite value";
        throw NonFiniteValue(os.str());
    }
    return g;
}

}  // namespace

double oracle_value(const ObjectiveOracle& oracle, const Vector& x) {
    return checked_value(oracle, x, "oracle_value");
}

Vector oracle_gradient(const ObjectiveOracle& oracle, const Vector& x) {
    return checked_gradient(oracle, x, "oracle_gradient");
}

Vector fd_gradient(const ObjectiveOracle& oracle, const Vector& x, double h) {
    const int n = x.size();
    Vector g = Vector::zeros(n);
    Vector probe = x;
    for (int i = 0; i < n; ++i) {
        const double hi = h * (1.0 + std::abs(x[i]));
        probe[i] = x[i] + hi;
        const double fp = checked_value(oracle, probe, "fd_gradient");
        probe[i] = x[i] - hi;
        const double fm = checked_value(oracle, probe, "fd_gradient");
        probe[i] = x[i];
        g[i] = (fp - fm) / (2.0 * hi);
    }
    return g;
}

DenseMatrix fd_hessian(const ObjectiveOracle& oracle, const Vector& x, double h) {
    const int n = x.size();
    DenseMatrix jac = DenseMatrix::zeros(n, n);
    Vector probe = x;
    for (int j = 0; j < n; ++j) {
        const double hj = h * (1.0 + std::abs(x[j]));
        probe[j] = x[j] + hj;
        const Vector gp = checked_gradient(oracle, probe, "fd_hessian");
        probe[j] = x[j] - hj;
        const Vector gm = checked_gradient(oracle, probe, "fd_hessian");
        probe[j] = x[j];
        for (int i = 0; i < n; ++i) jac(i, j) = (gp[i] - gm[i]) / (2.0 * hj);
    }
    return (jac + jac.transpose()) * 0.5;
}

GuardedJacobian backward_difference_jacobian(const DifferencePair& pair, double guard) {
    const int n = pair.x_curr.size();
    if (pair.x_prev.size() != n || pair.grad_prev.size() != n || pair.grad_curr.size() != n)
        throw ShapeMismatch("backward_difference_jacobian: inconsistent dimensions");

    GuardedJacobian out{DenseMatrix::zeros(n, n), {}};
    int degenerate = 0;
    for (int j = 0; j < n; ++j) {
        const double dx = pair.x_curr[j] - pair.x_prev[j];
        if (std::abs(dx) < guard) {
            out.d1(j, j) = 1.0;
            out.guarded_columns.push_back(j);
            ++degenerate;
            continue;
        }
        for (int i = 0; i < n; ++i)
            out.d1(i, j) = (pair.grad_curr[i] - pair.grad_prev[i]) / dx;
    }
    if (degenerate == n)
        throw AllColumnsDegenerate(
            "backward_difference_jacobian: every coordinate moved less than the guard");
    return out;
}

Vector hessian_diagonal(const ObjectiveOracle& oracle, const Vector& x, double h) {
    if (oracle.hessian_diag) {
        Vector d = oracle.hessian_diag(x);
        if (!d.all_finite())
            throw NonFiniteValue("hessian_diagonal: callback returned non-finite value");
        return d;
    }
    const int n = x.size();
    const double f0 = checked_value(oracle, x, "hessian_diagonal");
    Vector d = Vector::zeros(n);
    Vector probe = x;
    for (int i = 0; i < n; ++i) {
        const double hi = h * (1.0 + std::abs(x[i]));
        probe[i] = x[i] + hi;
        const double fp = checked_value(oracle, probe, "hessian_diagonal");
        probe[i] = x[i] - hi;
        const double fm = checked_value(oracle, probe, "hessian_diagonal");
        probe[i] = x[i];
        d[i] = (fp - 2.0 * f0 + fm) / (hi * hi);
    }
    return d;
}

DenseMatrix oracle_hessian(const ObjectiveOracle& oracle, const Vector& x) {
    if (oracle.hessian) {
        DenseMatrix h = oracle.hessian(x);
        for (int i = 0; i < h.rows(); ++i)
            for (int j = 0; j < h.cols(); ++j)
                if (!std::isfinite(h(i, j)))
                    throw NonFiniteValue("oracle_hessian: callback returned non-finite value");
        return h;
    }
    return fd_hessian(oracle, x);
}

}  // namespace optctl
