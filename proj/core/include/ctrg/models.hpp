#pragma once

#include <array>

#include "ctrg/bell.hpp"
#include "ctrg/linalg.hpp"

namespace ctrg {

/// A point on the Bloch sphere; |0_phi> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
struct BlochAngles {
    double theta = 0.0;
    double phi = 0.0;
};

/// The two orthogonal basis states of the measurement direction (outcome 0
/// along the direction, outcome 1 opposite).
std::vector<cplx> bloch_state(int outcome, const BlochAngles& angles);
CMatrix bloch_projector(int outcome, const BlochAngles& angles);

struct IonParams {
    double epsilon = 0.0; // leaked rotation ratio (Rabi-frequency ratio)
};

struct JosephsonParams {
    double p_a = 0.0; // probability that A's tunneling forces B to tunnel
    double p_b = 0.0;
};

struct ProductAnsatz {
    double q_a = 0.0;
    double q_b = 0.0;
};

/// Measurement angles for the CHSH settings; defaults to the equatorial
/// phi = +-pi/4 configuration on both sides.
struct MeasurementAngles {
    std::array<BlochAngles, 2> alice;
    std::array<BlochAngles, 2> bob;
    static MeasurementAngles standard_chsh();
};

/// Joint state plus local and collective POVMs on the 4-dimensional space.
struct DeviceModel {
    CMatrix state;                      // 4x4 density matrix
    std::array<CMatrix, 4> local_a;     // [x*2+a]
    std::array<CMatrix, 4> local_b;     // [y*2+b]
    std::array<CMatrix, 16> collective; // [((x*2+y)*2+a)*2+b]

    const CMatrix& pi_a(int a, int x) const { return local_a[x * 2 + a]; }
    const CMatrix& pi_b(int b, int y) const { return local_b[y * 2 + b]; }
    const CMatrix& pi_ab(int a, int b, int x, int y) const {
        return collective[((x * 2 + y) * 2 + a) * 2 + b];
    }
    /// POVM completeness and positivity within the stated tolerances.
    void validate(double tol = 1e-10) const;
};

/// CHSH Bell operator assembled from the product of the model's local
/// projectors; its principal eigenvector defines the model state.
CMatrix chsh_bell_operator(const MeasurementAngles& angles);

/// Ion-trap model: collective measurements project onto the epsilon-rotated
/// product states, local POVMs onto the unrotated ones.
DeviceModel ion_model(const IonParams& params);

/// Largest |eigenvalue| over the 16 differences between rotated and ideal
/// projectors: the model-based cross-talk estimate.
double ion_chi_bound(const IonParams& params);

/// Josephson read-out model: the tunneling of one qubit can force the other
/// to tunnel, attenuating anti-correlated outcomes.
DeviceModel josephson_model(const JosephsonParams& params,
                            const MeasurementAngles& angles = MeasurementAngles::standard_chsh());

struct JosephsonChiResult {
    double chi = 0.0;
    ProductAnsatz argmin;
    int evaluations = 0;
};

/// Minimize over the product ansatz (q_a, q_b) the largest |eigenvalue| of
/// the 16 differences between collective elements and the product POVM.
/// Coarse grid on [0, 0.01]^2 followed by Nelder-Mead refinement.
JosephsonChiResult josephson_chi_bound(
    const JosephsonParams& params,
    const MeasurementAngles& angles = MeasurementAngles::standard_chsh());

/// The cross-talk objective max_16 ||Pi_ab|xy - M_a|x (x) M_b|y|| at a fixed
/// ansatz; exposed for tests.
double josephson_chi_objective(const JosephsonParams& params, const ProductAnsatz& q,
                               const MeasurementAngles& angles);

/// Born rule: P(a,b|x,y) = Tr(rho Pi_ab|xy).
Behavior born_behavior(const DeviceModel& m);

/// Computational-basis device producing a = b = 0 deterministically.
DeviceModel deterministic_model();

} // namespace ctrg
