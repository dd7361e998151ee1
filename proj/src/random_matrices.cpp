#include "optctl/random_matrices.hpp"

#include <cmath>

namespace optctl {

double uniform_double(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

Vector random_vector(std::mt19937_64& rng, int n, double lo, double hi) {
    Vector v = Vector::zeros(n);
    for (int i = 0; i < n; ++i) v[i] = uniform_double(rng, lo, hi);
    return v;
}

DenseMatrix random_orthogonal(std::mt19937_64& rng, int n) {
    DenseMatrix q = DenseMatrix::identity(n);
    for (int rep = 0; rep < n; ++rep) {
        Vector v = random_vector(rng, n, -1.0, 1.0);
        const double nv = v.norm();
        if (nv < 1e-8) continue;
        v = v * (1.0 / nv);
        // q ← (I − 2vvᵀ)·q
        const Vector w = unchecked_vector([&] {
            std::vector<double> row(static_cast<std::size_t>(n), 0.0);
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += v[i] * q(i, j);
                row[static_cast<std::size_t>(j)] = s;
            }
            return row;
        }());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) q(i, j) -= 2.0 * v[i] * w[j];
    }
    return q;
}

DenseMatrix random_spd(std::mt19937_64& rng, int n, double eig_lo, double eig_hi) {
    Vector eigs = Vector::zeros(n);
    for (int i = 0; i < n; ++i) eigs[i] = uniform_double(rng, eig_lo, eig_hi);
    const DenseMatrix q = random_orthogonal(rng, n);
    DenseMatrix a = q * DenseMatrix::diagonal(eigs) * q.transpose();
    // Enforce exact symmetry against roundoff from the two products.
    return (a + a.transpose()) * 0.5;
}

DenseMatrix random_conditioned(std::mt19937_64& rng, int n, double sv_lo, double sv_hi) {
    Vector svs = Vector::zeros(n);
    for (int i = 0; i < n; ++i) svs[i] = uniform_double(rng, sv_lo, sv_hi);
    const DenseMatrix u = random_orthogonal(rng, n);
    const DenseMatrix v = random_orthogonal(rng, n);
    return u * DenseMatrix::diagonal(svs) * v.transpose();
}

}  // namespace optctl
