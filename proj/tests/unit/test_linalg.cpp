#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "ctrg/linalg.hpp"

using namespace ctrg;

namespace {

CMatrix pauli_z() {
    CMatrix m(2);
    m.at(0, 0) = 1.0;
    m.at(1, 1) = -1.0;
    return m;
}

CMatrix pauli_y() {
    CMatrix m(2);
    m.at(0, 1) = cplx(0.0, -1.0);
    m.at(1, 0) = cplx(0.0, 1.0);
    return m;
}

CMatrix random_hermitian(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CMatrix m(n);
    for (int i = 0; i < n; ++i) {
        m.at(i, i) = u(rng);
        for (int j = i + 1; j < n; ++j) {
            const cplx v(u(rng), u(rng));
            m.at(i, j) = v;
            m.at(j, i) = std::conj(v);
        }
    }
    return m;
}

std::vector<cplx> random_unit(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<cplx> v(n);
    double norm = 0.0;
    for (auto& x : v) {
        x = cplx(g(rng), g(rng));
        norm += std::norm(x);
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
}

// Characteristic polynomial coefficients via the Faddeev-LeVerrier
// recurrence, then roots by Durand-Kerner; independent of the QL path.
std::vector<double> charpoly_roots(const CMatrix& a) {
    const int n = a.dim();
    std::vector<cplx> coeff(n + 1);
    coeff[0] = 1.0;
    CMatrix m = CMatrix::zero(n);
    for (int k = 1; k <= n; ++k) {
        CMatrix am = a * m;
        for (int i = 0; i < n; ++i) am.at(i, i) += coeff[k - 1];
        m = am;
        coeff[k] = -(a * m).trace() / cplx(static_cast<double>(k), 0.0);
    }
    // p(x) = x^n + coeff[1] x^{n-1} + ... + coeff[n]
    std::vector<cplx> roots(n);
    for (int i = 0; i < n; ++i) roots[i] = std::polar(1.0 + 0.3 * i, 0.7 * i + 0.4);
    auto eval = [&](cplx x) {
        cplx p = coeff[0];
        for (int k = 1; k <= n; ++k) p = p * x + coeff[k];
        return p;
    };
    for (int it = 0; it < 500; ++it) {
        double moved = 0.0;
        for (int i = 0; i < n; ++i) {
            cplx denom = 1.0;
            for (int j = 0; j < n; ++j)
                if (j != i) denom *= (roots[i] - roots[j]);
            const cplx step = eval(roots[i]) / denom;
            roots[i] -= step;
            moved = std::max(moved, std::abs(step));
        }
        if (moved < 1e-14) break;
    }
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = roots[i].real();
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("kron identity and basis projectors") {
    const auto i4 = kron(CMatrix::identity(2), CMatrix::identity(2));
    CHECK((i4 - CMatrix::identity(4)).max_abs() == doctest::Approx(0.0));

    CMatrix d10(2), d01(2);
    d10.at(0, 0) = 1.0;
    d01.at(1, 1) = 1.0;
    const auto k = kron(d10, d01);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(k.at(i, j) == (i == 1 && j == 1 ? cplx(1.0) : cplx(0.0)));
}

TEST_CASE("kron of pauli z pair has doubly degenerate unit spectrum") {
    const auto eigs = herm_eigs(kron(pauli_z(), pauli_z()));
    REQUIRE(eigs.size() == 4);
    CHECK(eigs[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(eigs[1] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(eigs[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eigs[3] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kron is associative and bilinear") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        const auto a = random_hermitian(2, rng);
        const auto b = random_hermitian(2, rng);
        const auto c = random_hermitian(2, rng);
        const auto assoc = kron(kron(a, b), c) - kron(a, kron(b, c));
        CHECK(assoc.max_abs() <= 1e-12);
        const auto bil = kron(a + b, c) - (kron(a, c) + kron(b, c));
        CHECK(bil.max_abs() <= 1e-12);
        const auto dim = kron(a, kron(b, c)).dim();
        CHECK(dim == 8);
    }
}

TEST_CASE("herm_eigs on pauli z and rank-1 projectors") {
    const auto ez = herm_eigs(pauli_z());
    CHECK(ez.front() == doctest::Approx(-1.0));
    CHECK(ez.back() == doctest::Approx(1.0));

    std::mt19937_64 rng(7);
    for (int t = 0; t < 10; ++t) {
        const auto psi = random_unit(4, rng);
        const auto eigs = herm_eigs(CMatrix::outer(psi, psi));
        for (int i = 0; i < 3; ++i) CHECK(std::abs(eigs[i]) <= 1e-10);
        CHECK(eigs[3] == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("herm_eigs matches characteristic polynomial roots") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 10; ++t) {
        const auto a = random_hermitian(4, rng);
        const auto eigs = herm_eigs(a);
        const auto roots = charpoly_roots(a);
        for (int i = 0; i < 4; ++i) CHECK(eigs[i] == doctest::Approx(roots[i]).epsilon(1e-7));
    }
}

TEST_CASE("eigenvalue sum equals trace") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 25; ++t) {
        const auto a = random_hermitian(6, rng);
        const auto eigs = herm_eigs(a);
        double sum = 0.0;
        for (const double e : eigs) sum += e;
        CHECK(std::abs(sum - a.trace().real()) <= 1e-9);
    }
}

TEST_CASE("herm_eig_full reconstructs the matrix") {
    std::mt19937_64 rng(99);
    for (int t = 0; t < 8; ++t) {
        const auto a = random_hermitian(5, rng);
        const auto full = herm_eig_full(a);
        CMatrix recon(5);
        for (int k = 0; k < 5; ++k)
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j)
                    recon.at(i, j) += full.values[k] * full.vectors.at(i, k) *
                                      std::conj(full.vectors.at(j, k));
        CHECK((recon - a).max_abs() <= 1e-9 * 5);
    }
}

TEST_CASE("non-hermitian input is rejected") {
    CMatrix bad(2);
    bad.at(0, 1) = 1.0; // missing conjugate partner
    CHECK_THROWS_AS(herm_eigs(bad), std::invalid_argument);
    CHECK_THROWS_AS(real_embed(bad), std::invalid_argument);
}

TEST_CASE("real_embed of the identity and pauli y") {
    const auto e = real_embed(CMatrix::identity(2));
    CHECK(e.n == 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(e.at(i, j) == (i == j ? 1.0 : 0.0));

    const auto ey = sym_eig_values(real_embed(pauli_y()));
    CHECK(ey[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(ey[1] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(ey[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ey[3] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("real_embed PSD test agrees with the minimum eigenvalue") {
    std::mt19937_64 rng(301);
    int psd_count = 0;
    for (int t = 0; t < 1000; ++t) {
        auto a = random_hermitian(4, rng);
        if (t % 2 == 0) {
            // Shift half the samples to be PSD.
            const double mn = herm_eigs(a).front();
            for (int i = 0; i < 4; ++i) a.at(i, i) += -mn + 0.01;
        }
        const double direct = herm_eigs(a).front();
        const double embedded = sym_eig_values(real_embed(a)).front();
        CHECK((direct >= -1e-9) == (embedded >= -1e-9));
        CHECK(direct == doctest::Approx(embedded).epsilon(1e-9));
        if (direct >= 0) ++psd_count;
    }
    CHECK(psd_count >= 500);
}

TEST_CASE("max_abs_eig basics and the rank-2 overlap form") {
    CHECK(max_abs_eig(CMatrix::zero(3)) == doctest::Approx(0.0));
    CMatrix m2 = CMatrix::identity(2);
    m2 *= cplx(-2.0);
    CHECK(max_abs_eig(m2) == doctest::Approx(2.0));

    std::mt19937_64 rng(77);
    for (int t = 0; t < 20; ++t) {
        const auto xi = random_unit(4, rng);
        const auto psi = random_unit(4, rng);
        const auto diff = CMatrix::outer(xi, xi) - CMatrix::outer(psi, psi);
        cplx ov{};
        for (int i = 0; i < 4; ++i) ov += std::conj(xi[i]) * psi[i];
        const double expected = std::sqrt(std::max(0.0, 1.0 - std::norm(ov)));
        CHECK(max_abs_eig(diff) == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("cholesky factors a random SPD matrix") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = 12;
    std::vector<double> b(static_cast<size_t>(n) * n);
    for (auto& v : b) v = u(rng);
    // a = b b^T + n I
    std::vector<double> a(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = (i == j) ? n : 0.0;
            for (int k = 0; k < n; ++k)
                s += b[static_cast<size_t>(i) * n + k] * b[static_cast<size_t>(j) * n + k];
            a[static_cast<size_t>(i) * n + j] = s;
        }
    auto l = a;
    REQUIRE(cholesky_in_place(l, n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k <= std::min(i, j); ++k)
                s += l[static_cast<size_t>(i) * n + k] * l[static_cast<size_t>(j) * n + k];
            CHECK(s == doctest::Approx(a[static_cast<size_t>(i) * n + j]).epsilon(1e-10));
        }

    std::vector<double> indef = {1.0, 2.0, 2.0, 1.0};
    CHECK_FALSE(cholesky_in_place(indef, 2));
}
