#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "optctl/errors.hpp"

namespace optctl {

/// Dense real vector. Entries are validated to be finite on construction
/// and the dimension is at least 1.
class Vector {
  public:
    explicit Vector(std::vector<double> elems);
    Vector(std::initializer_list<double> elems);

    static Vector zeros(int n);
    static Vector ones(int n);
    /// Standard basis vector e_i (0-based).
    static Vector unit(int n, int i);

    int size() const { return static_cast<int>(elems_.size()); }
    double operator[](int i) const { return elems_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return elems_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& data() const { return elems_; }

    double norm() const;      // euclidean
    double max_abs() const;
    bool all_finite() const;

    Vector operator+(const Vector& rhs) const;
    Vector operator-(const Vector& rhs) const;
    Vector operator*(double s) const;
    double dot(const Vector& rhs) const;

  private:
    struct unchecked_tag {};
    Vector(std::vector<double> elems, unchecked_tag) : elems_(std::move(elems)) {}

    std::vector<double> elems_;

    friend class DenseMatrix;
    friend Vector unchecked_vector(std::vector<double>);
};

inline Vector operator*(double s, const Vector& v) { return v * s; }

/// Internal constructor that skips the finiteness check; used where the
/// caller is about to verify finiteness itself with a better message.
Vector unchecked_vector(std::vector<double> elems);

/// Dense real matrix, row-major. Entries validated finite on construction.
class DenseMatrix {
  public:
    DenseMatrix(int rows, int cols, std::vector<double> entries);
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static DenseMatrix zeros(int rows, int cols);
    static DenseMatrix identity(int n);
    static DenseMatrix scaled_identity(int n, double s);
    static DenseMatrix diagonal(const Vector& d);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double operator()(int i, int j) const { return a_[idx(i, j)]; }
    double& operator()(int i, int j) { return a_[idx(i, j)]; }

    double max_abs() const;  // ‖·‖_max, the largest entry magnitude
    DenseMatrix transpose() const;
    Vector diagonal_vector() const;
    Vector column(int j) const;

    DenseMatrix operator+(const DenseMatrix& rhs) const;
    DenseMatrix operator-(const DenseMatrix& rhs) const;
    DenseMatrix operator*(const DenseMatrix& rhs) const;
    Vector operator*(const Vector& v) const;
    DenseMatrix operator*(double s) const;

  private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
               static_cast<std::size_t>(j);
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

inline DenseMatrix operator*(double s, const DenseMatrix& m) { return m * s; }

/// Solve A·X = B with partial pivoting; X has the shape of B. A is never
/// inverted explicitly. Throws SingularMatrix when a pivot magnitude falls
/// below 1e-14·‖A‖_max.
DenseMatrix lu_solve(const DenseMatrix& A, const DenseMatrix& B);
Vector lu_solve(const DenseMatrix& A, const Vector& b);

/// Aᵖ by binary exponentiation; A⁰ = I.
DenseMatrix matrix_power(const DenseMatrix& A, int p);

/// Σ_{i=0}^{m} Aⁱ·C·v by the streaming recursion
///   s ← C·v; t ← C·v; repeat m times { t ← A·t; s ← s + t }.
/// Powers of A are never formed.
Vector geometric_sum_apply(const DenseMatrix& A, const DenseMatrix& C, const Vector& v, int m);

/// Largest eigenvalue magnitude by normalized power iteration: 5 seeded
/// restarts, at most 10000 iterations each, Rayleigh-quotient magnitude
/// stabilized to 1e-12 and residual-checked. Reliable for matrices with a
/// real dominant eigenvalue (everything similar to a symmetric matrix);
/// throws NoConvergence otherwise, in which case callers with n ≤ 2 may
/// use spectral_radius_closed_form.
double spectral_radius(const DenseMatrix& A);

/// Exact spectral radius for 1×1 and 2×2 matrices (quadratic formula;
/// handles complex pairs). Throws ShapeMismatch for n > 2.
double spectral_radius_closed_form(const DenseMatrix& A);

/// spectral_radius with the closed form as automatic fallback for n ≤ 2.
double spectral_radius_auto(const DenseMatrix& A);

/// True iff ‖A − Aᵀ‖_max ≤ tol·(1+‖A‖_max) and the symmetrized matrix
/// admits a Cholesky factorization with strictly positive pivots.
bool is_symmetric_pd(const DenseMatrix& A, double tol);

}  // namespace optctl
