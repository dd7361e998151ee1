#pragma once

#include <cstdint>
#include <random>

#include "optctl/linalg.hpp"

namespace optctl {

/// Deterministic uniform double in [lo, hi) from the raw engine output, so
/// streams are identical across standard libraries.
double uniform_double(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0);

Vector random_vector(std::mt19937_64& rng, int n, double lo = -1.0, double hi = 1.0);

/// Product of n Householder reflections: a deterministic random orthogonal
/// factor.
DenseMatrix random_orthogonal(std::mt19937_64& rng, int n);

/// Symmetric positive definite matrix with eigenvalues drawn uniformly from
/// [eig_lo, eig_hi], conjugated by a random orthogonal factor.
DenseMatrix random_spd(std::mt19937_64& rng, int n, double eig_lo, double eig_hi);

/// General square matrix with prescribed singular-value range (two
/// independent orthogonal factors), so the condition number is bounded by
/// sv_hi/sv_lo.
DenseMatrix random_conditioned(std::mt19937_64& rng, int n, double sv_lo, double sv_hi);

}  // namespace optctl
