#include "ctrg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ctrg {

const NumericPolicy& numeric_policy() {
    static const NumericPolicy policy{};
    return policy;
}

CMatrix CMatrix::identity(int dim) {
    CMatrix m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::outer(const std::vector<cplx>& u, const std::vector<cplx>& v) {
    if (u.size() != v.size()) throw std::invalid_argument("outer: length mismatch");
    CMatrix m(static_cast<int>(u.size()));
    for (size_t i = 0; i < u.size(); ++i)
        for (size_t j = 0; j < v.size(); ++j)
            m.at(static_cast<int>(i), static_cast<int>(j)) = u[i] * std::conj(v[j]);
    return m;
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
    if (n_ != o.n_) throw std::invalid_argument("CMatrix +=: dim mismatch");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
    if (n_ != o.n_) throw std::invalid_argument("CMatrix -=: dim mismatch");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

CMatrix& CMatrix::operator*=(cplx s) {
    for (auto& x : a_) x *= s;
    return *this;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("CMatrix *: dim mismatch");
    const int n = a.n_;
    CMatrix c(n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const cplx aik = a.at(i, k);
            if (aik == cplx{}) continue;
            for (int j = 0; j < n; ++j) c.at(i, j) += aik * b.at(k, j);
        }
    }
    return c;
}

CMatrix CMatrix::dagger() const {
    CMatrix m(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) m.at(j, i) = std::conj(at(i, j));
    return m;
}

cplx CMatrix::trace() const {
    cplx t{};
    for (int i = 0; i < n_; ++i) t += at(i, i);
    return t;
}

double CMatrix::max_abs() const {
    double m = 0.0;
    for (const auto& x : a_) m = std::max(m, std::abs(x));
    return m;
}

double CMatrix::hermiticity_defect() const {
    double d = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int j = i; j < n_; ++j)
            d = std::max(d, std::abs(at(i, j) - std::conj(at(j, i))));
    return d;
}

bool CMatrix::is_hermitian(double tol) const { return hermiticity_defect() <= tol; }

double RealSymMatrix::symmetry_defect() const {
    double d = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) d = std::max(d, std::abs(at(i, j) - at(j, i)));
    return d;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    const int na = a.dim(), nb = b.dim();
    CMatrix c(na * nb);
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < na; ++j) {
            const cplx aij = a.at(i, j);
            if (aij == cplx{}) continue;
            for (int k = 0; k < nb; ++k)
                for (int l = 0; l < nb; ++l)
                    c.at(i * nb + k, j * nb + l) = aij * b.at(k, l);
        }
    return c;
}

namespace {

// Householder reduction of a symmetric matrix (row-major in `z`) to
// tridiagonal form, accumulating the orthogonal transformation in `z`.
void tred2(std::vector<double>& z, int n, std::vector<double>& d, std::vector<double>& e) {
    auto at = [&](int r, int c) -> double& { return z[static_cast<size_t>(r) * n + c]; };
    for (int i = n - 1; i >= 1; --i) {
        const int l = i - 1;
        double h = 0.0, scale = 0.0;
        if (l > 0) {
            for (int k = 0; k <= l; ++k) scale += std::abs(at(i, k));
            if (scale == 0.0) {
                e[i] = at(i, l);
            } else {
                for (int k = 0; k <= l; ++k) {
                    at(i, k) /= scale;
                    h += at(i, k) * at(i, k);
                }
                double f = at(i, l);
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                at(i, l) = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    at(j, i) = at(i, j) / h;
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += at(j, k) * at(i, k);
                    for (int k = j + 1; k <= l; ++k) g += at(k, j) * at(i, k);
                    e[j] = g / h;
                    f += e[j] * at(i, j);
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = at(i, j);
                    e[j] = g = e[j] - hh * f;
                    for (int k = 0; k <= j; ++k) at(j, k) -= f * e[k] + g * at(i, k);
                }
            }
        } else {
            e[i] = at(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (int i = 0; i < n; ++i) {
        if (d[i] != 0.0) {
            for (int j = 0; j < i; ++j) {
                double g = 0.0;
                for (int k = 0; k < i; ++k) g += at(i, k) * at(k, j);
                for (int k = 0; k < i; ++k) at(k, j) -= g * at(k, i);
            }
        }
        d[i] = at(i, i);
        at(i, i) = 1.0;
        for (int j = 0; j < i; ++j) at(j, i) = at(i, j) = 0.0;
    }
}

// Implicit-shift QL on a tridiagonal matrix (diagonal d, subdiagonal e),
// rotating the columns of `z` along. Eigenvalues land in d, unsorted.
void tql2(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z, int n) {
    auto at = [&](int r, int c) -> double& { return z[static_cast<size_t>(r) * n + c]; };
    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == 128) throw std::runtime_error("sym_eig: QL failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = at(k, i + 1);
                        at(k, i + 1) = s * at(k, i) + c * f;
                        at(k, i) = c * at(k, i) - s * f;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

} // namespace

SymEigResult sym_eig(const RealSymMatrix& m) {
    const int n = m.n;
    SymEigResult res;
    res.values.assign(n, 0.0);
    res.vectors = m.a;
    // Symmetrize first so roundoff in the input cannot bias the reduction.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = 0.5 * (res.vectors[static_cast<size_t>(i) * n + j] +
                                    res.vectors[static_cast<size_t>(j) * n + i]);
            res.vectors[static_cast<size_t>(i) * n + j] = v;
            res.vectors[static_cast<size_t>(j) * n + i] = v;
        }
    if (n == 0) return res;
    if (n == 1) {
        res.values[0] = m.a[0];
        res.vectors[0] = 1.0;
        return res;
    }
    std::vector<double> e(n, 0.0);
    tred2(res.vectors, n, res.values, e);
    tql2(res.values, e, res.vectors, n);

    // Ascending eigenvalues with columns permuted along.
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return res.values[a] < res.values[b]; });
    std::vector<double> sorted_vals(n);
    std::vector<double> sorted_vecs(static_cast<size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        sorted_vals[j] = res.values[idx[j]];
        for (int i = 0; i < n; ++i)
            sorted_vecs[static_cast<size_t>(i) * n + j] =
                res.vectors[static_cast<size_t>(i) * n + idx[j]];
    }
    res.values = std::move(sorted_vals);
    res.vectors = std::move(sorted_vecs);
    return res;
}

std::vector<double> sym_eig_values(const RealSymMatrix& m) { return sym_eig(m).values; }

RealSymMatrix real_embed(const CMatrix& a) {
    if (!a.is_hermitian())
        throw std::invalid_argument("real_embed: matrix is not Hermitian within tolerance");
    const int n = a.dim();
    RealSymMatrix m(2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const cplx v = a.at(i, j);
            m.at(i, j) = v.real();
            m.at(i, j + n) = -v.imag();
            m.at(i + n, j) = v.imag();
            m.at(i + n, j + n) = v.real();
        }
    return m;
}

std::vector<double> herm_eigs(const CMatrix& a) {
    if (!a.is_hermitian())
        throw std::invalid_argument("herm_eigs: matrix is not Hermitian within tolerance");
    const auto all = sym_eig_values(real_embed(a));
    std::vector<double> out;
    out.reserve(a.dim());
    // Each eigenvalue of A shows up twice in the embedding.
    for (size_t k = 0; k + 1 < all.size(); k += 2) out.push_back(0.5 * (all[k] + all[k + 1]));
    return out;
}

HermEigResult herm_eig_full(const CMatrix& a) {
    if (!a.is_hermitian())
        throw std::invalid_argument("herm_eig_full: matrix is not Hermitian within tolerance");
    const int n = a.dim();
    const auto emb = sym_eig(real_embed(a));

    HermEigResult res;
    res.values.reserve(n);
    res.vectors = CMatrix(n);

    // Embedding eigenvectors (u; v) map to complex eigenvectors u + i v.
    // Each A-eigenspace of dimension k appears with dimension 2k, so walk
    // the doubled spectrum in clusters and keep an orthonormal half.
    std::vector<std::vector<cplx>> kept;
    const double scale = std::max(1.0, std::abs(emb.values.front()) + std::abs(emb.values.back()));
    const double cluster_tol = 1e-9 * scale;
    int pos = 0;
    while (pos < 2 * n) {
        int end = pos + 1;
        while (end < 2 * n && emb.values[end] - emb.values[end - 1] <= cluster_tol) ++end;
        const int mult = (end - pos) / 2; // multiplicity in A
        std::vector<std::vector<cplx>> cluster_kept;
        for (int c = pos; c < end && static_cast<int>(cluster_kept.size()) < mult; ++c) {
            std::vector<cplx> w(n);
            for (int i = 0; i < n; ++i)
                w[i] = cplx(emb.vectors[static_cast<size_t>(i) * 2 * n + c],
                            emb.vectors[static_cast<size_t>(i + n) * 2 * n + c]);
            for (const auto& k : cluster_kept) {
                cplx ip{};
                for (int i = 0; i < n; ++i) ip += std::conj(k[i]) * w[i];
                for (int i = 0; i < n; ++i) w[i] -= ip * k[i];
            }
            double nrm = 0.0;
            for (int i = 0; i < n; ++i) nrm += std::norm(w[i]);
            nrm = std::sqrt(nrm);
            if (nrm > 1e-6) {
                for (int i = 0; i < n; ++i) w[i] /= nrm;
                cluster_kept.push_back(std::move(w));
            }
        }
        double mean = 0.0;
        for (int c = pos; c < end; ++c) mean += emb.values[c];
        mean /= (end - pos);
        for (auto& v : cluster_kept) {
            res.values.push_back(mean);
            kept.push_back(std::move(v));
        }
        pos = end;
    }
    if (static_cast<int>(kept.size()) != n)
        throw std::runtime_error("herm_eig_full: eigenvector extraction failed");
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) res.vectors.at(i, j) = kept[j][i];
    return res;
}

double max_abs_eig(const CMatrix& a) {
    const auto ev = herm_eigs(a);
    if (ev.empty()) return 0.0;
    return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

bool cholesky_in_place(std::vector<double>& a, int n) {
    for (int j = 0; j < n; ++j) {
        double d = a[static_cast<size_t>(j) * n + j];
        const double* rowj = &a[static_cast<size_t>(j) * n];
        for (int k = 0; k < j; ++k) d -= rowj[k] * rowj[k];
        if (d <= 0.0 || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        a[static_cast<size_t>(j) * n + j] = ljj;
        const double inv = 1.0 / ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = a[static_cast<size_t>(i) * n + j];
            const double* rowi = &a[static_cast<size_t>(i) * n];
            for (int k = 0; k < j; ++k) s -= rowi[k] * rowj[k];
            a[static_cast<size_t>(i) * n + j] = s * inv;
        }
    }
    // Zero the strict upper triangle so the buffer is exactly L.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) a[static_cast<size_t>(i) * n + j] = 0.0;
    return true;
}

} // namespace ctrg
