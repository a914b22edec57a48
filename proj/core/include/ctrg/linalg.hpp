#pragma once

#include <complex>
#include <vector>

#include "ctrg/numeric.hpp"

namespace ctrg {

using cplx = std::complex<double>;

/// Dense complex matrix in row-major layout. Small and value-semantic;
/// everything in this project is at most a few hundred rows.
class CMatrix {
public:
    CMatrix() = default;
    explicit CMatrix(int dim) : n_(dim), a_(static_cast<size_t>(dim) * dim) {}

    static CMatrix identity(int dim);
    static CMatrix zero(int dim) { return CMatrix(dim); }
    /// Outer product |u><v| of two vectors of equal length.
    static CMatrix outer(const std::vector<cplx>& u, const std::vector<cplx>& v);

    int dim() const { return n_; }
    cplx& at(int r, int c) { return a_[static_cast<size_t>(r) * n_ + c]; }
    const cplx& at(int r, int c) const { return a_[static_cast<size_t>(r) * n_ + c]; }
    const std::vector<cplx>& data() const { return a_; }

    CMatrix& operator+=(const CMatrix& o);
    CMatrix& operator-=(const CMatrix& o);
    CMatrix& operator*=(cplx s);
    friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
    friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
    friend CMatrix operator*(cplx s, CMatrix a) { return a *= s; }
    friend CMatrix operator*(const CMatrix& a, const CMatrix& b);

    CMatrix dagger() const;
    cplx trace() const;
    double max_abs() const;
    /// Entrywise max |A - A^dag|.
    double hermiticity_defect() const;
    bool is_hermitian(double tol = numeric_policy().hermiticity) const;

private:
    int n_ = 0;
    std::vector<cplx> a_;
};

/// Dense real symmetric matrix, row-major. Used as the PSD-cone block type
/// by the conic solver and as the image of real_embed.
struct RealSymMatrix {
    int n = 0;
    std::vector<double> a; // n*n row-major

    RealSymMatrix() = default;
    explicit RealSymMatrix(int dim) : n(dim), a(static_cast<size_t>(dim) * dim, 0.0) {}

    double& at(int r, int c) { return a[static_cast<size_t>(r) * n + c]; }
    double at(int r, int c) const { return a[static_cast<size_t>(r) * n + c]; }
    double symmetry_defect() const;
};

/// Kronecker (tensor) product, standard convention:
/// (A (x) B)[i*nb+k][j*nb+l] = A[i][j] * B[k][l].
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Eigenvalues of a Hermitian matrix, ascending. Rejects inputs whose
/// hermiticity defect exceeds the policy tolerance.
std::vector<double> herm_eigs(const CMatrix& a);

struct HermEigResult {
    std::vector<double> values; // ascending
    CMatrix vectors;            // column j is the eigenvector of values[j]
};
HermEigResult herm_eig_full(const CMatrix& a);

/// Largest |eigenvalue| of a Hermitian matrix (its operator norm).
double max_abs_eig(const CMatrix& a);

/// Real embedding [[Re A, -Im A], [Im A, Re A]] of a Hermitian matrix.
/// A is PSD iff the embedding is PSD; every eigenvalue of A appears twice.
RealSymMatrix real_embed(const CMatrix& a);

struct SymEigResult {
    std::vector<double> values;  // ascending
    std::vector<double> vectors; // n*n row-major, column j = eigenvector j
};

/// Dense symmetric eigensolver: Householder tridiagonalization followed by
/// implicit-shift QL, with accumulated transformations.
SymEigResult sym_eig(const RealSymMatrix& m);
std::vector<double> sym_eig_values(const RealSymMatrix& m);

/// In-place lower Cholesky of a symmetric positive definite matrix stored
/// row-major in `a` (n*n). Returns false if a nonpositive pivot is met.
bool cholesky_in_place(std::vector<double>& a, int n);

} // namespace ctrg
