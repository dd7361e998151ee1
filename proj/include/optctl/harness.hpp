#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "optctl/problems.hpp"
#include "optctl/steppers.hpp"

namespace optctl {

/// One run after name resolution and parameter defaulting: everything needed
/// to reproduce it exactly.
struct ResolvedRun {
    std::string run_id;
    std::string problem;
    Algorithm algorithm = Algorithm::AlgI;
    std::uint64_t seed = 0;  // effective seed for randomized problems
    Vector x0{1};
    StepperConfig config;
};

struct ExperimentConfig {
    std::filesystem::path output_dir = "results";
    std::uint64_t seed = 0;
    std::vector<ResolvedRun> runs;
};

enum class RateClass { Superlinear, Linear, Sublinear, Inconclusive };

std::string rate_class_name(RateClass c);

struct RateClassification {
    RateClass label = RateClass::Inconclusive;
    double slope = 0.0;       // least-squares slope of log r_k against k
    double mean_ratio = 0.0;
    int valid_ratios = 0;
};

/// Convergence diagnosis of one finished run.
struct RateReport {
    std::string run_id;
    std::string problem;
    Algorithm algorithm = Algorithm::AlgI;
    StopReason stop;
    int iterations = 0;
    double final_grad_norm = 0.0;
    std::optional<double> final_err_norm;
    double rho = 0.0;            // spectral radius of the run's contraction matrix
    std::vector<int> ratio_ks;   // iteration indices carrying a valid ratio
    std::vector<double> ratios;  // e_{k+1}/e_k at those indices
    std::vector<double> bounds;  // theoretical reference at those indices (ρ^{k+1})
    RateClassification classification;
    bool err_from_final_iterate = false;  // no known minimizer: errors vs x_final
    std::vector<std::string> warnings;
};

struct ExperimentResult {
    std::vector<Trace> traces;
    std::vector<RateReport> reports;
    std::vector<std::filesystem::path> csv_paths;
    std::filesystem::path summary_path;
    bool all_stopped_by_tolerance = false;
};

/// Parse, validate, and resolve a JSON experiment description: problem and
/// algorithm names are checked, defaults from default_parameters are filled
/// in, and overrides are applied. Throws ParseError for malformed JSON and
/// ValidationError (naming the field) for schema or parameter violations.
/// The documented schema is described in the README.
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config_from_string(const std::string& text,
                                         std::optional<std::uint64_t> seed_override = std::nullopt);

/// Execute every run: one CSV per run with header exactly
/// `k,f,grad_norm,err_norm,ratio,bound`, plus summary.json carrying each
/// run's fully resolved parameter set, stop reason, and rate classification.
/// Rerunning the same config reproduces the CSV bodies byte for byte.
ExperimentResult execute(const ExperimentConfig& cfg);

/// Label a sequence of error ratios r_k (at iteration indices ks).
/// Superlinear: least-squares slope of log r_k ≤ −0.05 and the final ratio
/// under half the first. Linear: flat slope with mean ratio < 1. Sublinear:
/// mean ratio ≈ 1 while errors still shrink overall. Fewer than 3 ratios:
/// Inconclusive.
RateClassification classify_rate(const std::vector<double>& ratios, const std::vector<int>& ks);

/// Build the diagnosis for a finished run. Covers the trivial
/// fast-convergence case: a run that reaches the gradient tolerance with
/// fewer than 3 valid ratios, all below 0.5, is Superlinear.
RateReport make_rate_report(const std::string& run_id, const ProblemSpec& problem,
                            const ResolvedRun& run, const RunResult& run_result);

/// ρ of the algorithm's contraction matrix evaluated at the known minimizer
/// (or at x0 when none is known): (R+H)⁻¹R, I−MH, I−DΛ, I−αH per family;
/// 0 for Newton.
double contraction_spectral_radius(const ProblemSpec& problem, const ResolvedRun& run);

struct OcpVerification {
    int trials = 0;
    double max_cross_check_rel = 0.0;  // exact vs brute force, controls and cost
    double max_law_residual = 0.0;     // control-law + costate residuals
    std::uint64_t failing_seed = 0;
    bool passed = false;
};

/// Cross-check the exact LQ solver against the brute-force assembly over
/// seeded random problems (n ≤ 3, N ≤ 5); passes iff every residual and
/// relative difference is ≤ 1e-9.
OcpVerification verify_ocp(std::uint64_t seed, int trials, std::ostream* log = nullptr);

}  // namespace optctl
