#pragma once

namespace ctrg {

// Central numeric tolerances. Every module consults this record instead of
// hard-coding its own thresholds.
struct NumericPolicy {
    double hermiticity  = 1e-12; // entrywise |A - A^dag| accepted as Hermitian
    double eig_residual = 1e-9;  // ||A - V L V^dag||_max <= eig_residual * dim
    double psd_slack    = 1e-9;  // eigenvalue slack when certifying PSD
};

const NumericPolicy& numeric_policy();

} // namespace ctrg
