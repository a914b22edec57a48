#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ctrg/bell.hpp"
#include "ctrg/models.hpp"

namespace ctrg {

struct ExperimentConfig {
    std::uint64_t n = 100000;   // number of rounds
    std::uint64_t seed = 0;     // RNG seed; the whole run is a function of it
    double epsilon_sec = 1e-6;  // security / confidence parameter
    std::array<double, 4> input_distribution{0.25, 0.25, 0.25, 0.25}; // (x,y) = 00,01,10,11
};

struct TrialRecord {
    std::uint8_t x = 0, y = 0, a = 0, b = 0;
};

struct EstimateResult {
    double I_hat = 0.0;
    double delta_hat = 0.0;
    double confidence_radius = 0.0; // Hoeffding union bound over the 16 cells
    std::array<std::uint64_t, 4> setting_counts{}; // per (x,y)
    Behavior empirical;
};

/// Bound method used to turn (I, chi) into a guessing-probability bound.
enum class BoundMethod { Analytic, Lp, Sdp };
const char* to_string(BoundMethod m);
BoundMethod bound_method_from_string(const std::string& s);

struct Certificate {
    double I_hat = 0.0;
    double I_adj = 0.0;   // statistically adjusted, floored at the local bound
    double delta_hat = 0.0;
    double chi = 0.0;       // trusted cross-talk budget (input)
    BoundMethod method = BoundMethod::Analytic;
    std::string method_detail; // level or curve choice
    double p_star = 1.0;
    bool certified = false;      // true when p_star carries a dual certificate
    double min_entropy = 0.0;    // -n log2 p_star
    std::uint64_t n = 0;
    double epsilon_sec = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t extractor_seed = 0;
    std::uint64_t input_bits = 0;  // raw outcome bits fed to the extractor
    std::uint64_t output_length = 0;
    std::vector<std::uint8_t> output_bits; // packed LSB-first

    std::string to_json() const;
};

/// Bit vector packed LSB-first into bytes.
struct BitString {
    std::uint64_t size = 0;
    std::vector<std::uint8_t> bytes;

    static BitString zeros(std::uint64_t n);
    int get(std::uint64_t i) const;
    void set(std::uint64_t i, int v);
    std::string to_hex() const;
};

/// Deterministic i.i.d. sampling of a Bell experiment from a device model.
std::vector<TrialRecord> simulate(const DeviceModel& m, const ExperimentConfig& cfg);

/// Frequencies, empirical Bell value, empirical signaling, Hoeffding radius.
EstimateResult estimate(const std::vector<TrialRecord>& records, double epsilon_sec);

/// Toeplitz extraction over GF(2): out = T bits with T_{ij} = seed[i-j+k-1].
BitString toeplitz_extract(const BitString& bits, const BitString& seed, std::uint64_t out_len);

struct CertifyOptions {
    BoundMethod method = BoundMethod::Analytic;
    std::string level = "l1xy";              // SDP relaxation level
    bool zero_curve_closed_form = true;      // analytic method: closed form vs SDP curve
    std::function<double(double)> zero_curve; // optional override for the chi=0 curve
};

/// End-to-end certification from recorded trials: estimate, bound, account
/// min-entropy, extract.
Certificate certify(const std::vector<TrialRecord>& records, double chi,
                    const ExperimentConfig& cfg, const CertifyOptions& opt = {});

/// Certification from an exactly known behavior (no statistical penalty);
/// n still scales the entropy accounting and extraction.
Certificate certify_behavior(const Behavior& behavior, double chi, const ExperimentConfig& cfg,
                             const CertifyOptions& opt = {});

std::string records_to_csv(const std::vector<TrialRecord>& records);
std::vector<TrialRecord> records_from_csv(const std::string& text);

} // namespace ctrg
