#include "optctl/steppers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace optctl {

namespace {

constexpr double kCurvatureFloor = 1e-8;  // guard for λ̂ ≈ 0 at x0
constexpr double kParameterCap = 1e4;     // cap on guarded default parameters
constexpr double kDefaultTheta = 0.5;     // per-coordinate damping for D

void reject(const std::string& msg) { throw ValidationError(msg); }

bool has_R(const StepperConfig& c) { return c.R_matrix.has_value() || c.r_scalar.has_value(); }
bool has_M(const StepperConfig& c) { return c.M_matrix.has_value() || c.m_scalar.has_value(); }

int series_depth(int k, const StepperConfig& cfg) {
    // Number of extra terms beyond the base one: the exponent at iteration k
    // is k+1, optionally truncated to horizon_cap.
    if (cfg.horizon_cap) return std::min(k, *cfg.horizon_cap - 1);
    return k;
}

}  // namespace

void validate_config(const StepperConfig& cfg, int n) {
    const Algorithm a = cfg.algorithm;

    const bool needs_R = a == Algorithm::AlgI || a == Algorithm::FiniteHorizonBackward;
    const bool needs_M = a == Algorithm::AlgIIClosed || a == Algorithm::AlgIIRecursive;
    const bool needs_D = a == Algorithm::AlgIII || a == Algorithm::AlgIV;
    const bool needs_gd = a == Algorithm::GradientDescent;
    const bool capped_family = a == Algorithm::AlgI || needs_M || needs_D;

    if (needs_R && !has_R(cfg)) reject("config: algorithm requires R (matrix or scalar)");
    if (!needs_R && has_R(cfg)) reject("config: R is not a parameter of this algorithm");
    if (needs_M && !has_M(cfg)) reject("config: algorithm requires M (matrix or scalar)");
    if (!needs_M && has_M(cfg)) reject("config: M is not a parameter of this algorithm");
    if (needs_D && !cfg.D_diag) reject("config: algorithm requires D (positive diagonal)");
    if (!needs_D && cfg.D_diag) reject("config: D is not a parameter of this algorithm");
    if (needs_gd && !cfg.gd_step) reject("config: gradient descent requires gd_step");
    if (!needs_gd && cfg.gd_step) reject("config: gd_step is not a parameter of this algorithm");
    if (a == Algorithm::FiniteHorizonBackward && !cfg.N_horizon)
        reject("config: finite-horizon algorithm requires N_horizon");
    if (a != Algorithm::FiniteHorizonBackward && cfg.N_horizon)
        reject("config: N_horizon is not a parameter of this algorithm");
    if (cfg.horizon_cap && !capped_family)
        reject("config: horizon_cap applies only to the growing-exponent algorithms");

    if (cfg.R_matrix && cfg.r_scalar) reject("config: R given both as matrix and scalar");
    if (cfg.M_matrix && cfg.m_scalar) reject("config: M given both as matrix and scalar");

    if (cfg.r_scalar && *cfg.r_scalar < 0.0) reject("config: scalar R must be >= 0");
    if (cfg.R_matrix) {
        if (!cfg.R_matrix->square() || cfg.R_matrix->rows() != n)
            reject("config: R must be n x n");
        if (!is_symmetric_pd(*cfg.R_matrix, 1e-10)) reject("config: R must be symmetric PD");
    }
    if (cfg.m_scalar && !(*cfg.m_scalar > 0.0)) reject("config: scalar M must be > 0");
    if (cfg.M_matrix) {
        if (!cfg.M_matrix->square() || cfg.M_matrix->rows() != n)
            reject("config: M must be n x n");
        if (!is_symmetric_pd(*cfg.M_matrix, 1e-10)) reject("config: M must be symmetric PD");
    }
    if (cfg.D_diag) {
        if (cfg.D_diag->size() != n) reject("config: D must have dimension n");
        for (int i = 0; i < n; ++i)
            if (!((*cfg.D_diag)[i] > 0.0)) reject("config: D entries must be > 0");
    }
    if (cfg.gd_step && !(*cfg.gd_step > 0.0)) reject("config: gd_step must be > 0");
    if (cfg.N_horizon && *cfg.N_horizon < 0) reject("config: N_horizon must be >= 0");
    if (cfg.horizon_cap && *cfg.horizon_cap < 1) reject("config: horizon_cap must be >= 1");
    if (!(cfg.grad_tol > 0.0)) reject("config: grad_tol must be > 0");
    if (!(cfg.step_tol > 0.0)) reject("config: step_tol must be > 0");
    if (cfg.max_iter < 1) reject("config: max_iter must be >= 1");
}

DenseMatrix resolve_R(const StepperConfig& cfg, int n) {
    if (cfg.R_matrix) return *cfg.R_matrix;
    if (cfg.r_scalar) return DenseMatrix::scaled_identity(n, *cfg.r_scalar);
    throw ValidationError("config: R not set");
}

DenseMatrix resolve_M(const StepperConfig& cfg, int n) {
    if (cfg.M_matrix) return *cfg.M_matrix;
    if (cfg.m_scalar) return DenseMatrix::scaled_identity(n, *cfg.m_scalar);
    throw ValidationError("config: M not set");
}

Vector gradient_descent_step(const ObjectiveOracle& oracle, const Vector& x,
                             const StepperConfig& cfg) {
    return oracle_gradient(oracle, x) * cfg.gd_step.value();
}

Vector newton_step(const ObjectiveOracle& oracle, const Vector& x) {
    const DenseMatrix h = oracle_hessian(oracle, x);
    return lu_solve(h, oracle_gradient(oracle, x));
}

Vector alg1_step(const ObjectiveOracle& oracle, const Vector& x, int k,
                 const StepperConfig& cfg) {
    const int n = x.size();
    const Vector grad = oracle_gradient(oracle, x);
    const DenseMatrix rh = resolve_R(cfg, n) + oracle_hessian(oracle, x);
    // One factorization yields the propagator (R+H)⁻¹R, a second the seed
    // (R+H)⁻¹∇f; the geometric sum then needs only matrix-vector products.
    const DenseMatrix prop = lu_solve(rh, resolve_R(cfg, n));
    const Vector seed = lu_solve(rh, grad);
    return geometric_sum_apply(prop, DenseMatrix::identity(n), seed, series_depth(k, cfg));
}

Vector alg1_closed_step(const ObjectiveOracle& oracle, const Vector& x, int k,
                        const StepperConfig& cfg) {
    const int n = x.size();
    const DenseMatrix h = oracle_hessian(oracle, x);
    const DenseMatrix rh = resolve_R(cfg, n) + h;
    const DenseMatrix prop = lu_solve(rh, resolve_R(cfg, n));
    const Vector newton = lu_solve(h, oracle_gradient(oracle, x));
    const int m = series_depth(k, cfg);
    return newton - matrix_power(prop, m + 1) * newton;
}

Vector finite_horizon_step(const ObjectiveOracle& oracle, const Vector& x, int k,
                           const StepperConfig& cfg) {
    const int horizon = cfg.N_horizon.value();
    if (k > horizon) {
        std::ostringstream os;
        os << "finite_horizon_step: k=" << k << " past terminal time N=" << horizon;
        throw HorizonExceeded(os.str());
    }
    const int n = x.size();
    const Vector grad = oracle_gradient(oracle, x);
    const DenseMatrix rh = resolve_R(cfg, n) + oracle_hessian(oracle, x);
    const DenseMatrix prop = lu_solve(rh, resolve_R(cfg, n));
    const Vector seed = lu_solve(rh, grad);
    return geometric_sum_apply(prop, DenseMatrix::identity(n), seed, horizon - k);
}

Vector alg2_closed_step(const ObjectiveOracle& oracle, const Vector& x, int k,
                        const StepperConfig& cfg) {
    const int n = x.size();
    const DenseMatrix h = oracle_hessian(oracle, x);
    const DenseMatrix contraction = DenseMatrix::identity(n) - resolve_M(cfg, n) * h;
    const Vector newton = lu_solve(h, oracle_gradient(oracle, x));
    const int m = series_depth(k, cfg);
    return newton - matrix_power(contraction, m + 1) * newton;
}

Vector alg2_recursive_step(const ObjectiveOracle& oracle, const Vector& x, int k,
                           const StepperConfig& cfg) {
    const int n = x.size();
    const Vector grad = oracle_gradient(oracle, x);
    const DenseMatrix m_mat = resolve_M(cfg, n);
    const DenseMatrix contraction = DenseMatrix::identity(n) - m_mat * oracle_hessian(oracle, x);
    const Vector base = m_mat * grad;
    Vector g = base;
    const int m = series_depth(k, cfg);
    for (int i = 0; i < m; ++i) g = base + contraction * g;
    if (!g.all_finite()) throw NonFiniteValue("alg2_recursive_step: direction overflowed");
    return g;
}

Alg3Step alg3_step(const ObjectiveOracle& oracle, const Vector& x, int k,
                   const StepperConfig& cfg, Alg3State& state) {
    const int n = x.size();
    const Vector grad = oracle_gradient(oracle, x);
    const Vector& d = *cfg.D_diag;

    // Secant curvature per coordinate: the diagonal of the guarded
    // backward-difference quotient matrix. The full ratio matrix has rank
    // one, which leaves I − D·D_1 with unit eigenvalues for n ≥ 2 and makes
    // the growing-depth recursion diverge; its diagonal is the stable part
    // and is exact on separable quadratics.
    Alg3Step out{Vector::zeros(n), {}};
    Vector curvature = Vector::ones(n);
    if (k > 0 && state.prev_x && state.prev_grad) {
        try {
            GuardedJacobian gj = backward_difference_jacobian(
                DifferencePair{*state.prev_x, *state.prev_grad, x, grad});
            curvature = gj.d1.diagonal_vector();
            out.guarded_columns = std::move(gj.guarded_columns);
        } catch (const AllColumnsDegenerate&) {
            // Stalled iterate: fall back to D_1 = I and flag every column.
            for (int j = 0; j < n; ++j) out.guarded_columns.push_back(j);
        }
    }

    Vector g = Vector::zeros(n);
    if (cfg.inner_mode == InnerMode::Streaming && k > 0 && state.prev_dir) {
        for (int i = 0; i < n; ++i)
            g[i] = d[i] * grad[i] + (1.0 - d[i] * curvature[i]) * (*state.prev_dir)[i];
    } else {
        const int m = series_depth(k, cfg);
        for (int i = 0; i < n; ++i) {
            const double base = d[i] * grad[i];
            const double factor = 1.0 - d[i] * curvature[i];
            double gi = base;
            for (int t = 0; t < m; ++t) gi = base + factor * gi;
            g[i] = gi;
        }
    }
    if (!g.all_finite()) throw NonFiniteValue("alg3_step: direction overflowed");

    state.prev_x = x;
    state.prev_grad = grad;
    state.prev_dir = g;
    out.step = std::move(g);
    return out;
}

Vector alg4_step(const ObjectiveOracle& oracle, const Vector& x, int k,
                 const StepperConfig& cfg, const std::optional<Vector>& prev_dir) {
    const int n = x.size();
    const Vector grad = oracle_gradient(oracle, x);
    const Vector lambda = hessian_diagonal(oracle, x);
    const Vector& d = *cfg.D_diag;

    Vector g = Vector::zeros(n);
    if (cfg.inner_mode == InnerMode::Streaming && k > 0 && prev_dir) {
        for (int i = 0; i < n; ++i)
            g[i] = d[i] * grad[i] + (1.0 - d[i] * lambda[i]) * (*prev_dir)[i];
    } else {
        const int m = series_depth(k, cfg);
        for (int i = 0; i < n; ++i) {
            const double base = d[i] * grad[i];
            const double factor = 1.0 - d[i] * lambda[i];
            double gi = base;
            for (int t = 0; t < m; ++t) gi = base + factor * gi;
            g[i] = gi;
        }
    }
    if (!g.all_finite()) throw NonFiniteValue("alg4_step: direction overflowed");
    return g;
}

namespace {

// Contraction validity is observable only at x0 (the condition that matters
// lives at the unknown x*), so a violation is reported, not fatal.
std::vector<std::string> startup_warnings(const ObjectiveOracle& oracle, const Vector& x0,
                                          const StepperConfig& cfg) {
    std::vector<std::string> warnings;
    const int n = x0.size();
    try {
        if (cfg.algorithm == Algorithm::AlgIIClosed ||
            cfg.algorithm == Algorithm::AlgIIRecursive) {
            const DenseMatrix c =
                DenseMatrix::identity(n) - resolve_M(cfg, n) * oracle_hessian(oracle, x0);
            const double rho = spectral_radius_auto(c);
            if (rho >= 1.0) {
                std::ostringstream os;
                os << "rho(I - M*H(x0)) = " << rho << " >= 1; superlinear contraction not "
                   << "guaranteed from this start";
                warnings.push_back(os.str());
            }
        } else if (cfg.algorithm == Algorithm::AlgIV || cfg.algorithm == Algorithm::AlgIII) {
            const Vector lambda = hessian_diagonal(oracle, x0);
            double rho = 0.0;
            for (int i = 0; i < n; ++i)
                rho = std::max(rho, std::abs(1.0 - (*cfg.D_diag)[i] * lambda[i]));
            if (rho >= 1.0) {
                std::ostringstream os;
                os << "rho(I - D*Lambda(x0)) = " << rho << " >= 1; superlinear contraction "
                   << "not guaranteed from this start";
                warnings.push_back(os.str());
            }
        }
    } catch (const Error&) {
        // Estimation failures leave the warning list empty.
    }
    return warnings;
}

}  // namespace

RunResult run(const ObjectiveOracle& oracle, const Vector& x0, const StepperConfig& cfg) {
    const int n = oracle.dimension;
    if (x0.size() != n) throw ValidationError("run: x0 dimension does not match oracle");
    validate_config(cfg, n);

    RunResult result;
    result.warnings = startup_warnings(oracle, x0, cfg);

    std::optional<double> f_star;
    if (oracle.known_minimizer) f_star = oracle.value(*oracle.known_minimizer);

    Vector x = x0;
    Alg3State alg3_state;
    std::optional<Vector> prev_dir;

    for (int k = 0;; ++k) {
        TraceRecord rec{k, x, 0.0, 0.0, Vector::zeros(n), {}, {}, {}};
        Vector grad = Vector::zeros(n);
        try {
            rec.f = oracle_value(oracle, x);
            grad = oracle_gradient(oracle, x);
        } catch (const Error& e) {
            result.trace.records.push_back(std::move(rec));
            result.stop = {StopCode::NumericalFailure, e.what()};
            return result;
        }
        rec.grad_norm = grad.norm();
        if (oracle.known_minimizer) {
            rec.err_norm = (x - *oracle.known_minimizer).norm();
            rec.lyapunov = rec.f - *f_star;
        }

        if (rec.grad_norm <= cfg.grad_tol) {
            result.trace.records.push_back(std::move(rec));
            result.stop = {StopCode::GradientTolerance, {}};
            return result;
        }
        if (k >= cfg.max_iter) {
            result.trace.records.push_back(std::move(rec));
            result.stop = {StopCode::MaxIterations, {}};
            return result;
        }
        if (cfg.algorithm == Algorithm::FiniteHorizonBackward && k > *cfg.N_horizon) {
            result.trace.records.push_back(std::move(rec));
            result.stop = {StopCode::MaxIterations, "finite horizon complete"};
            return result;
        }

        Vector step = Vector::zeros(n);
        try {
            switch (cfg.algorithm) {
                case Algorithm::GradientDescent:
                    step = gradient_descent_step(oracle, x, cfg);
                    break;
                case Algorithm::Newton:
                    step = newton_step(oracle, x);
                    break;
                case Algorithm::FiniteHorizonBackward:
                    step = finite_horizon_step(oracle, x, k, cfg);
                    break;
                case Algorithm::AlgI:
                    step = alg1_step(oracle, x, k, cfg);
                    break;
                case Algorithm::AlgIIClosed:
                    step = alg2_closed_step(oracle, x, k, cfg);
                    break;
                case Algorithm::AlgIIRecursive:
                    step = alg2_recursive_step(oracle, x, k, cfg);
                    break;
                case Algorithm::AlgIII: {
                    Alg3Step s = alg3_step(oracle, x, k, cfg, alg3_state);
                    step = std::move(s.step);
                    rec.guarded_columns = std::move(s.guarded_columns);
                    break;
                }
                case Algorithm::AlgIV:
                    step = alg4_step(oracle, x, k, cfg, prev_dir);
                    break;
            }
            if (!step.all_finite()) throw NonFiniteValue("run: step overflowed");
        } catch (const Error& e) {
            result.trace.records.push_back(std::move(rec));
            result.stop = {StopCode::NumericalFailure, e.what()};
            return result;
        }

        prev_dir = step;
        rec.step = step;
        const double step_norm = step.norm();
        result.trace.records.push_back(std::move(rec));
        if (step_norm <= cfg.step_tol) {
            result.stop = {StopCode::StepTolerance, {}};
            return result;
        }
        x = x - step;
    }
}

StepperConfig default_parameters(const ObjectiveOracle& oracle, const Vector& x0,
                                 Algorithm algorithm) {
    StepperConfig cfg;
    cfg.algorithm = algorithm;
    if (algorithm == Algorithm::Newton) return cfg;

    const double lambda_hat = spectral_radius_auto(oracle_hessian(oracle, x0));
    const double lambda_guarded = std::max(lambda_hat, kCurvatureFloor);
    const double safe_scale = std::min(1.0 / lambda_guarded, kParameterCap);

    switch (algorithm) {
        case Algorithm::GradientDescent:
            cfg.gd_step = safe_scale;
            break;
        case Algorithm::FiniteHorizonBackward:
            cfg.N_horizon = 10;
            [[fallthrough]];
        case Algorithm::AlgI:
            cfg.r_scalar = lambda_guarded;
            break;
        case Algorithm::AlgIIClosed:
        case Algorithm::AlgIIRecursive:
            cfg.m_scalar = safe_scale;
            break;
        case Algorithm::AlgIII:
        case Algorithm::AlgIV: {
            // θ/Λᵢ per coordinate, floored at the global safe scale so a
            // locally flat coordinate (Λᵢ ≈ 0) cannot produce an unbounded
            // step, and capped like the other guarded defaults.
            const Vector lambda_diag = hessian_diagonal(oracle, x0);
            Vector d = Vector::zeros(x0.size());
            for (int i = 0; i < x0.size(); ++i) {
                const double curvature =
                    std::max({lambda_diag[i], kDefaultTheta * lambda_guarded, kCurvatureFloor});
                d[i] = std::min(kDefaultTheta / curvature, kParameterCap);
            }
            cfg.D_diag = d;
            break;
        }
        case Algorithm::Newton:
            break;
    }
    return cfg;
}

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::GradientDescent: return "gradient-descent";
        case Algorithm::Newton: return "newton";
        case Algorithm::FiniteHorizonBackward: return "finite-horizon-backward";
        case Algorithm::AlgI: return "alg1";
        case Algorithm::AlgIIClosed: return "alg2-closed";
        case Algorithm::AlgIIRecursive: return "alg2-recursive";
        case Algorithm::AlgIII: return "alg3";
        case Algorithm::AlgIV: return "alg4";
    }
    return "unknown";
}

std::optional<Algorithm> parse_algorithm(const std::string& name) {
    if (name == "gradient-descent" || name == "gd") return Algorithm::GradientDescent;
    if (name == "newton") return Algorithm::Newton;
    if (name == "finite-horizon-backward" || name == "finite-horizon")
        return Algorithm::FiniteHorizonBackward;
    if (name == "alg1") return Algorithm::AlgI;
    if (name == "alg2-closed") return Algorithm::AlgIIClosed;
    if (name == "alg2-recursive" || name == "alg2") return Algorithm::AlgIIRecursive;
    if (name == "alg3") return Algorithm::AlgIII;
    if (name == "alg4") return Algorithm::AlgIV;
    return std::nullopt;
}

std::string stop_code_name(StopCode c) {
    switch (c) {
        case StopCode::GradientTolerance: return "gradient-tolerance";
        case StopCode::StepTolerance: return "step-tolerance";
        case StopCode::MaxIterations: return "max-iterations";
        case StopCode::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

}  // namespace optctl
