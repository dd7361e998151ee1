#pragma once

#include <optional>
#include <string>
#include <vector>

#include "optctl/differentiation.hpp"
#include "optctl/linalg.hpp"

namespace optctl {

enum class Algorithm {
    GradientDescent,
    Newton,
    FiniteHorizonBackward,
    AlgI,
    AlgIIClosed,
    AlgIIRecursive,
    AlgIII,
    AlgIV,
};

/// Interpretation of the inner direction recursion for AlgIII/AlgIV:
/// Unrolled re-runs the recursion at the current iterate (depth grows with
/// k); Streaming reuses the previous outer direction once per iteration.
enum class InnerMode { Unrolled, Streaming };

/// Parameters for one run. Each algorithm requires exactly its own
/// parameters; validate_config rejects missing or extraneous ones.
///   GradientDescent        gd_step
///   Newton                 (none)
///   FiniteHorizonBackward  R (matrix or scalar r·I), N_horizon
///   AlgI                   R (matrix or scalar r·I)
///   AlgIIClosed/Recursive  M (matrix or scalar m·I)
///   AlgIII / AlgIV         D (positive diagonal)
/// horizon_cap truncates the growing exponent k+1 of AlgI/AlgII/III/IV to at
/// most `cap` series terms; uncapped runs are the default. Capping trades
/// the superlinear rate for a fixed per-iteration cost (linear rate ρ^cap).
struct StepperConfig {
    Algorithm algorithm = Algorithm::AlgI;

    std::optional<DenseMatrix> R_matrix;
    std::optional<double> r_scalar;  // r ≥ 0; r = 0 is the degenerate Newton reduction
    std::optional<DenseMatrix> M_matrix;
    std::optional<double> m_scalar;
    std::optional<Vector> D_diag;

    std::optional<double> gd_step;
    std::optional<int> N_horizon;
    std::optional<int> horizon_cap;

    double grad_tol = 1e-10;
    double step_tol = 1e-14;
    int max_iter = 500;
    InnerMode inner_mode = InnerMode::Unrolled;
};

/// Throws ValidationError unless cfg carries exactly the parameters its
/// algorithm needs, with the required positivity, for dimension n.
void validate_config(const StepperConfig& cfg, int n);

/// The R parameter expanded to a dense matrix (scalar r means r·I).
DenseMatrix resolve_R(const StepperConfig& cfg, int n);
/// The M parameter expanded to a dense matrix (scalar m means m·I).
DenseMatrix resolve_M(const StepperConfig& cfg, int n);

struct TraceRecord {
    int k = 0;
    Vector x;
    double f = 0.0;
    double grad_norm = 0.0;
    /// Step subtracted from x to obtain the next iterate. Zero in the final
    /// record except on a step-tolerance stop, where it holds the
    /// sub-tolerance step that was not applied.
    Vector step;
    std::optional<double> err_norm;   // |x − x*| when the minimizer is known
    std::optional<double> lyapunov;   // f(x) − f(x*) when the minimizer is known
    std::vector<int> guarded_columns; // AlgIII columns replaced by identity
};

struct Trace {
    std::vector<TraceRecord> records;
    int iterations() const { return static_cast<int>(records.size()) - 1; }
};

enum class StopCode { GradientTolerance, StepTolerance, MaxIterations, NumericalFailure };

struct StopReason {
    StopCode code = StopCode::MaxIterations;
    std::string detail;  // originating error for NumericalFailure
};

struct RunResult {
    Trace trace;
    StopReason stop;
    std::vector<std::string> warnings;  // parameter-validity notes from x0
};

/// Mutable state threaded through an AlgIII run: the previous iterate, its
/// gradient, and the previous outer direction.
struct Alg3State {
    std::optional<Vector> prev_x;
    std::optional<Vector> prev_grad;
    std::optional<Vector> prev_dir;
};

struct Alg3Step {
    Vector step;
    std::vector<int> guarded_columns;
};

/// One gradient-descent step: gd_step·∇f(x).
Vector gradient_descent_step(const ObjectiveOracle& oracle, const Vector& x,
                             const StepperConfig& cfg);

/// Newton direction: the solution d of H(x)·d = ∇f(x). Throws SingularMatrix
/// when H(x) is numerically singular.
Vector newton_step(const ObjectiveOracle& oracle, const Vector& x);

/// Damped-Newton direction with control weight R, iteration index k:
///   z = Σ_{i=0}^{m} [(R+H)⁻¹R]ⁱ (R+H)⁻¹ ∇f(x),  m = min(k, horizon_cap−1).
/// Every (R+H)⁻¹ application is a linear solve; H itself is never solved,
/// so H may be singular as long as R+H is not.
Vector alg1_step(const ObjectiveOracle& oracle, const Vector& x, int k,
                 const StepperConfig& cfg);

/// Closed form [I − ((R+H)⁻¹R)^{m+1}] H⁻¹ ∇f(x) of the same direction.
/// Needs H nonsingular; kept as a cross-check for alg1_step.
Vector alg1_closed_step(const ObjectiveOracle& oracle, const Vector& x, int k,
                        const StepperConfig& cfg);

/// Finite-horizon backward direction: series of length N_horizon − k + 1.
/// Throws HorizonExceeded when k > N_horizon.
Vector finite_horizon_step(const ObjectiveOracle& oracle, const Vector& x, int k,
                           const StepperConfig& cfg);

/// [I − (I − M·H)^{m+1}] H⁻¹ ∇f(x). Needs H nonsingular.
Vector alg2_closed_step(const ObjectiveOracle& oracle, const Vector& x, int k,
                        const StepperConfig& cfg);

/// Equivalent inverse-free realization, safe for singular H:
///   g ← M∇f;  repeat m times  g ← M∇f + (I − M·H)·g.
Vector alg2_recursive_step(const ObjectiveOracle& oracle, const Vector& x, int k,
                           const StepperConfig& cfg);

/// Backward-difference variant: second-order information comes from the
/// diagonal of the guarded backward-difference quotient matrix D_1 built
/// from the previous iterate (I at k = 0); the recursion is elementwise,
///   gᵢ ← dᵢ∇fᵢ + (1 − dᵢ[D_1]ᵢᵢ)·gᵢ.
/// Only the diagonal is consumed: the full quotient matrix has rank one, so
/// I − D·D_1 keeps unit eigenvalues for n ≥ 2 and the growing-depth
/// recursion would diverge on them. Updates `state`.
Alg3Step alg3_step(const ObjectiveOracle& oracle, const Vector& x, int k,
                   const StepperConfig& cfg, Alg3State& state);

/// Diagonal variant: per coordinate gᵢ ← dᵢ∇fᵢ + (1 − dᵢΛᵢ)·gᵢ where Λ is the
/// Hessian diagonal. `prev_dir` is consulted only in Streaming mode.
Vector alg4_step(const ObjectiveOracle& oracle, const Vector& x, int k,
                 const StepperConfig& cfg,
                 const std::optional<Vector>& prev_dir = std::nullopt);

/// Iterate x_{k+1} = x_k − g_k from x0 until |∇f| ≤ grad_tol, |g_k| ≤
/// step_tol, k = max_iter, or (finite horizon) k > N_horizon. Stepper errors
/// become StopCode::NumericalFailure with the partial trace attached.
/// Deterministic given (oracle, x0, cfg).
RunResult run(const ObjectiveOracle& oracle, const Vector& x0, const StepperConfig& cfg);

/// Fill the algorithm's parameters from curvature at x0: with λ̂ = ρ(H(x0)),
///   gd_step = 1/λ̂,  M = (1/λ̂)·I,  R = λ̂·I,
///   dᵢ = θ/max(Λᵢ(x0), θ·λ̂) with θ = 0.5,
/// all guarded for λ̂ ≈ 0 and capped at 1e4, and all overridable afterwards.
StepperConfig default_parameters(const ObjectiveOracle& oracle, const Vector& x0,
                                 Algorithm algorithm);

std::string algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(const std::string& name);
std::string stop_code_name(StopCode c);

}  // namespace optctl
