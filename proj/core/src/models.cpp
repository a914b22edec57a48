#include "ctrg/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctrg {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::vector<cplx> bloch_state(int outcome, const BlochAngles& angles) {
    const double ct = std::cos(angles.theta / 2.0), st = std::sin(angles.theta / 2.0);
    const cplx phase = std::polar(1.0, angles.phi);
    if (outcome == 0) return {cplx(ct, 0.0), phase * st};
    return {cplx(st, 0.0), -phase * ct};
}

CMatrix bloch_projector(int outcome, const BlochAngles& angles) {
    const auto v = bloch_state(outcome, angles);
    return CMatrix::outer(v, v);
}

MeasurementAngles MeasurementAngles::standard_chsh() {
    MeasurementAngles m;
    for (int x = 0; x < 2; ++x) m.alice[x] = {kPi / 2.0, (x == 0 ? 1.0 : -1.0) * kPi / 4.0};
    for (int y = 0; y < 2; ++y) m.bob[y] = {kPi / 2.0, (y == 0 ? 1.0 : -1.0) * kPi / 4.0};
    return m;
}

void DeviceModel::validate(double tol) const {
    if (std::abs(state.trace().real() - 1.0) > tol || std::abs(state.trace().imag()) > tol)
        throw std::invalid_argument("DeviceModel: state trace != 1");
    if (herm_eigs(state).front() < -tol)
        throw std::invalid_argument("DeviceModel: state not PSD");
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            CMatrix sum = CMatrix::zero(4);
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const auto& pi = pi_ab(a, b, x, y);
                    if (herm_eigs(pi).front() < -tol)
                        throw std::invalid_argument("DeviceModel: collective element not PSD");
                    sum += pi;
                }
            sum -= CMatrix::identity(4);
            if (sum.max_abs() > tol)
                throw std::invalid_argument("DeviceModel: POVM completeness violated");
        }
}

CMatrix chsh_bell_operator(const MeasurementAngles& angles) {
    CMatrix op = CMatrix::zero(4);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y) {
                    const double c = ((a ^ b ^ (x & y)) != 0) ? -1.0 : 1.0;
                    op += c * kron(bloch_projector(a, angles.alice[x]),
                                   bloch_projector(b, angles.bob[y]));
                }
    return op;
}

namespace {

CMatrix principal_state(const MeasurementAngles& angles) {
    const auto eig = herm_eig_full(chsh_bell_operator(angles));
    const int n = eig.vectors.dim();
    std::vector<cplx> top(n);
    for (int i = 0; i < n; ++i) top[i] = eig.vectors.at(i, n - 1);
    return CMatrix::outer(top, top);
}

BlochAngles ion_rotated_alice(int x, int y, double eps) {
    return {kPi / 2.0, ((x == 0 ? 1.0 : -1.0) + (y == 0 ? 1.0 : -1.0) * eps) * kPi / 4.0};
}
BlochAngles ion_rotated_bob(int x, int y, double eps) {
    return {kPi / 2.0, ((y == 0 ? 1.0 : -1.0) + (x == 0 ? 1.0 : -1.0) * eps) * kPi / 4.0};
}

} // namespace

DeviceModel ion_model(const IonParams& params) {
    if (params.epsilon < 0.0 || params.epsilon >= 1.0)
        throw std::invalid_argument("ion_model: epsilon outside [0,1)");
    const auto angles = MeasurementAngles::standard_chsh();
    DeviceModel m;
    m.state = principal_state(angles);
    for (int x = 0; x < 2; ++x)
        for (int a = 0; a < 2; ++a) m.local_a[x * 2 + a] = bloch_projector(a, angles.alice[x]);
    for (int y = 0; y < 2; ++y)
        for (int b = 0; b < 2; ++b) m.local_b[y * 2 + b] = bloch_projector(b, angles.bob[y]);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const auto pa = bloch_projector(a, ion_rotated_alice(x, y, params.epsilon));
                    const auto pb = bloch_projector(b, ion_rotated_bob(x, y, params.epsilon));
                    m.collective[((x * 2 + y) * 2 + a) * 2 + b] = kron(pa, pb);
                }
    return m;
}

double ion_chi_bound(const IonParams& params) {
    const auto m = ion_model(params);
    double chi = 0.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    CMatrix diff = m.pi_ab(a, b, x, y);
                    diff -= kron(m.pi_a(a, x), m.pi_b(b, y));
                    chi = std::max(chi, max_abs_eig(diff));
                }
    return chi;
}

DeviceModel josephson_model(const JosephsonParams& params, const MeasurementAngles& angles) {
    if (params.p_a < 0.0 || params.p_a > 1.0 || params.p_b < 0.0 || params.p_b > 1.0)
        throw std::invalid_argument("josephson_model: probabilities outside [0,1]");
    DeviceModel m;
    m.state = principal_state(angles);
    for (int x = 0; x < 2; ++x)
        for (int a = 0; a < 2; ++a) m.local_a[x * 2 + a] = bloch_projector(a, angles.alice[x]);
    for (int y = 0; y < 2; ++y)
        for (int b = 0; b < 2; ++b) m.local_b[y * 2 + b] = bloch_projector(b, angles.bob[y]);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            const auto p00 = kron(m.pi_a(0, x), m.pi_b(0, y));
            const auto p01 = kron(m.pi_a(0, x), m.pi_b(1, y));
            const auto p10 = kron(m.pi_a(1, x), m.pi_b(0, y));
            const auto p11 = kron(m.pi_a(1, x), m.pi_b(1, y));
            auto& c00 = m.collective[((x * 2 + y) * 2 + 0) * 2 + 0];
            auto& c01 = m.collective[((x * 2 + y) * 2 + 0) * 2 + 1];
            auto& c10 = m.collective[((x * 2 + y) * 2 + 1) * 2 + 0];
            auto& c11 = m.collective[((x * 2 + y) * 2 + 1) * 2 + 1];
            c00 = p00;
            c01 = (1.0 - params.p_b) * p01;
            c10 = (1.0 - params.p_a) * p10;
            c11 = p11;
            c11 += params.p_b * p01;
            c11 += params.p_a * p10;
        }
    return m;
}

double josephson_chi_objective(const JosephsonParams& params, const ProductAnsatz& q,
                               const MeasurementAngles& angles) {
    if (q.q_a < 0.0 || q.q_a > 1.0 || q.q_b < 0.0 || q.q_b > 1.0)
        return std::numeric_limits<double>::infinity();
    const auto m = josephson_model(params, angles);
    double chi = 0.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            std::array<CMatrix, 2> ma = {
                (1.0 - q.q_a) * m.pi_a(0, x) + q.q_a * m.pi_a(1, x),
                q.q_a * m.pi_a(0, x) + (1.0 - q.q_a) * m.pi_a(1, x)};
            std::array<CMatrix, 2> mb = {
                (1.0 - q.q_b) * m.pi_b(0, y) + q.q_b * m.pi_b(1, y),
                q.q_b * m.pi_b(0, y) + (1.0 - q.q_b) * m.pi_b(1, y)};
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    CMatrix diff = m.pi_ab(a, b, x, y);
                    diff -= kron(ma[a], mb[b]);
                    chi = std::max(chi, max_abs_eig(diff));
                }
        }
    return chi;
}

JosephsonChiResult josephson_chi_bound(const JosephsonParams& params,
                                       const MeasurementAngles& angles) {
    JosephsonChiResult res;
    auto f = [&](double qa, double qb) {
        ++res.evaluations;
        return josephson_chi_objective(params, {qa, qb}, angles);
    };
    // Coarse grid on [0, 0.01]^2.
    double best = std::numeric_limits<double>::infinity();
    double bqa = 0.0, bqb = 0.0;
    const int grid = 101;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            const double qa = 0.01 * i / (grid - 1);
            const double qb = 0.01 * j / (grid - 1);
            const double v = f(qa, qb);
            if (v < best - 1e-15 ||
                (std::abs(v - best) <= 1e-15 && std::make_pair(qa, qb) < std::make_pair(bqa, bqb))) {
                best = v;
                bqa = qa;
                bqb = qb;
            }
        }
    // Nelder-Mead refinement around the best grid cell.
    struct Pt {
        double qa, qb, v;
    };
    const double h = 0.01 / (grid - 1);
    auto make = [&](double qa, double qb) {
        qa = std::clamp(qa, 0.0, 1.0);
        qb = std::clamp(qb, 0.0, 1.0);
        return Pt{qa, qb, f(qa, qb)};
    };
    std::array<Pt, 3> simplex = {make(bqa, bqb), make(bqa + h, bqb), make(bqa, bqb + h)};
    for (int it = 0; it < 200; ++it) {
        std::sort(simplex.begin(), simplex.end(),
                  [](const Pt& a, const Pt& b) { return a.v < b.v; });
        const double spread = std::max(std::abs(simplex[2].qa - simplex[0].qa),
                                       std::abs(simplex[2].qb - simplex[0].qb));
        if (spread < 1e-7 && simplex[2].v - simplex[0].v < 1e-10) break;
        const double cqa = 0.5 * (simplex[0].qa + simplex[1].qa);
        const double cqb = 0.5 * (simplex[0].qb + simplex[1].qb);
        Pt refl = make(cqa + (cqa - simplex[2].qa), cqb + (cqb - simplex[2].qb));
        if (refl.v < simplex[0].v) {
            Pt expand = make(cqa + 2.0 * (cqa - simplex[2].qa), cqb + 2.0 * (cqb - simplex[2].qb));
            simplex[2] = (expand.v < refl.v) ? expand : refl;
        } else if (refl.v < simplex[1].v) {
            simplex[2] = refl;
        } else {
            Pt contract = make(cqa + 0.5 * (simplex[2].qa - cqa), cqb + 0.5 * (simplex[2].qb - cqb));
            if (contract.v < simplex[2].v) {
                simplex[2] = contract;
            } else {
                for (int k = 1; k < 3; ++k)
                    simplex[k] = make(0.5 * (simplex[k].qa + simplex[0].qa),
                                      0.5 * (simplex[k].qb + simplex[0].qb));
            }
        }
    }
    std::sort(simplex.begin(), simplex.end(), [](const Pt& a, const Pt& b) { return a.v < b.v; });
    res.chi = simplex[0].v;
    res.argmin = {simplex[0].qa, simplex[0].qb};
    return res;
}

Behavior born_behavior(const DeviceModel& m) {
    Behavior beh;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y) {
                    const cplx tr = (m.state * m.pi_ab(a, b, x, y)).trace();
                    beh.p(a, b, x, y) = tr.real();
                }
    if (!beh.is_valid(1e-9, 1e-10))
        throw std::runtime_error("born_behavior: model produced an invalid behavior");
    return beh;
}

DeviceModel deterministic_model() {
    DeviceModel m;
    std::vector<cplx> ket00 = {1.0, 0.0, 0.0, 0.0};
    m.state = CMatrix::outer(ket00, ket00);
    const BlochAngles comp{0.0, 0.0};
    for (int x = 0; x < 2; ++x)
        for (int a = 0; a < 2; ++a) m.local_a[x * 2 + a] = bloch_projector(a, comp);
    for (int y = 0; y < 2; ++y)
        for (int b = 0; b < 2; ++b) m.local_b[y * 2 + b] = bloch_projector(b, comp);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    m.collective[((x * 2 + y) * 2 + a) * 2 + b] =
                        kron(m.pi_a(a, x), m.pi_b(b, y));
    return m;
}

} // namespace ctrg
