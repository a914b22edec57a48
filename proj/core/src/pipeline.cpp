#include "ctrg/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ctrg/analytic.hpp"
#include "ctrg/lp.hpp"
#include "ctrg/npa_bounds.hpp"

namespace ctrg {

const char* to_string(BoundMethod m) {
    switch (m) {
        case BoundMethod::Analytic: return "analytic";
        case BoundMethod::Lp: return "lp";
        case BoundMethod::Sdp: return "sdp";
    }
    return "unknown";
}

BoundMethod bound_method_from_string(const std::string& s) {
    if (s == "analytic") return BoundMethod::Analytic;
    if (s == "lp") return BoundMethod::Lp;
    if (s == "sdp") return BoundMethod::Sdp;
    throw std::invalid_argument("unknown bound method: " + s);
}

BitString BitString::zeros(std::uint64_t n) {
    BitString b;
    b.size = n;
    b.bytes.assign((n + 7) / 8, 0);
    return b;
}

int BitString::get(std::uint64_t i) const { return (bytes[i >> 3] >> (i & 7)) & 1; }

void BitString::set(std::uint64_t i, int v) {
    if (v)
        bytes[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
    else
        bytes[i >> 3] &= static_cast<std::uint8_t>(~(1u << (i & 7)));
}

std::string BitString::to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (const auto b : bytes) {
        out += digits[b >> 4];
        out += digits[b & 0xf];
    }
    return out;
}

namespace {

// Uniform double in [0,1) from the top 53 bits of the generator output;
// keeps the stream identical across standard libraries.
double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

std::vector<TrialRecord> simulate(const DeviceModel& m, const ExperimentConfig& cfg) {
    if (cfg.n < 1) throw std::invalid_argument("simulate: need n >= 1");
    double dist_sum = 0.0;
    for (const double v : cfg.input_distribution) dist_sum += v;
    if (std::abs(dist_sum - 1.0) > 1e-9)
        throw std::invalid_argument("simulate: input distribution must sum to 1");

    const Behavior beh = born_behavior(m);
    std::mt19937_64 rng(cfg.seed);
    std::vector<TrialRecord> out;
    out.reserve(cfg.n);
    for (std::uint64_t t = 0; t < cfg.n; ++t) {
        const double ux = next_unit(rng);
        int setting = 3;
        double acc = 0.0;
        for (int s = 0; s < 4; ++s) {
            acc += cfg.input_distribution[s];
            if (ux < acc) {
                setting = s;
                break;
            }
        }
        const int x = setting >> 1, y = setting & 1;
        const double uo = next_unit(rng);
        int outcome = 3;
        acc = 0.0;
        for (int o = 0; o < 4; ++o) {
            acc += beh.p(o >> 1, o & 1, x, y);
            if (uo < acc) {
                outcome = o;
                break;
            }
        }
        TrialRecord r;
        r.x = static_cast<std::uint8_t>(x);
        r.y = static_cast<std::uint8_t>(y);
        r.a = static_cast<std::uint8_t>(outcome >> 1);
        r.b = static_cast<std::uint8_t>(outcome & 1);
        out.push_back(r);
    }
    return out;
}

EstimateResult estimate(const std::vector<TrialRecord>& records, double epsilon_sec) {
    if (records.empty()) throw std::invalid_argument("estimate: no records");
    std::array<std::array<std::uint64_t, 4>, 4> counts{}; // [xy][ab]
    std::array<std::uint64_t, 4> totals{};
    for (const auto& r : records) {
        const int s = r.x * 2 + r.y;
        ++counts[s][r.a * 2 + r.b];
        ++totals[s];
    }
    for (int s = 0; s < 4; ++s)
        if (totals[s] == 0)
            throw std::invalid_argument("estimate: setting pair never sampled");

    EstimateResult res;
    res.setting_counts = totals;
    Behavior emp;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    emp.p(a, b, x, y) = static_cast<double>(counts[x * 2 + y][a * 2 + b]) /
                                        static_cast<double>(totals[x * 2 + y]);
    emp.clip_and_renormalize();
    res.empirical = emp;
    const auto chsh = BellExpression::chsh();
    res.I_hat = chsh.evaluate(emp);
    res.delta_hat = signaling_delta(emp).delta;
    // Hoeffding union bound over the 16 empirical cells, each within
    // sqrt(ln(2/eps')/2n) of its mean with eps' = eps_sec/16.
    const double eps_prime = epsilon_sec / 16.0;
    const std::uint64_t n_min = *std::min_element(totals.begin(), totals.end());
    res.confidence_radius =
        chsh.gamma() * std::sqrt(std::log(2.0 / eps_prime) / (2.0 * static_cast<double>(n_min)));
    return res;
}

BitString toeplitz_extract(const BitString& bits, const BitString& seed, std::uint64_t out_len) {
    const std::uint64_t k = bits.size;
    if (out_len == 0) return BitString::zeros(0);
    if (seed.size != out_len + k - 1)
        throw std::invalid_argument("toeplitz_extract: seed length must be out_len + k - 1");

    // T_{ij} = seed[i - j + k - 1]; row i of T is a contiguous window of the
    // reversed seed starting at out_len - 1 - i, which makes the GF(2) dot
    // products word-parallel.
    BitString rs = BitString::zeros(seed.size);
    for (std::uint64_t t = 0; t < seed.size; ++t)
        if (seed.get(seed.size - 1 - t)) rs.set(t, 1);

    const std::uint64_t words = (k + 63) / 64;
    std::vector<std::uint64_t> bw(words, 0);
    for (std::uint64_t i = 0; i < k; ++i)
        if (bits.get(i)) bw[i >> 6] |= (1ull << (i & 63));
    // Reversed seed as a word array with headroom for shifted reads.
    const std::uint64_t rs_words = (rs.size + 63) / 64 + 2;
    std::vector<std::uint64_t> rw(rs_words, 0);
    for (std::uint64_t i = 0; i < rs.size; ++i)
        if (rs.get(i)) rw[i >> 6] |= (1ull << (i & 63));

    BitString out = BitString::zeros(out_len);
    for (std::uint64_t i = 0; i < out_len; ++i) {
        const std::uint64_t off = out_len - 1 - i;
        const std::uint64_t word_off = off >> 6;
        const unsigned shift = static_cast<unsigned>(off & 63);
        std::uint64_t parity = 0;
        for (std::uint64_t wi = 0; wi < words; ++wi) {
            std::uint64_t window = rw[word_off + wi] >> shift;
            if (shift) window |= rw[word_off + wi + 1] << (64 - shift);
            if (wi == words - 1 && (k & 63)) window &= (~0ull) >> (64 - (k & 63));
            parity ^= window & bw[wi];
        }
        out.set(i, std::popcount(parity) & 1);
    }
    return out;
}

namespace {

BitString records_to_bits(const std::vector<TrialRecord>& records) {
    BitString b = BitString::zeros(2 * records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        b.set(2 * i, records[i].a);
        b.set(2 * i + 1, records[i].b);
    }
    return b;
}

Certificate certify_core(double I_hat, double delta_hat, double radius,
                         const BitString& raw_bits, double chi, const ExperimentConfig& cfg,
                         const CertifyOptions& opt) {
    Certificate cert;
    cert.I_hat = I_hat;
    cert.delta_hat = delta_hat;
    cert.chi = chi;
    cert.method = opt.method;
    cert.n = cfg.n;
    cert.epsilon_sec = cfg.epsilon_sec;
    cert.seed = cfg.seed;
    cert.I_adj = std::max(kChshLocal, I_hat - radius);

    const auto chsh = BellExpression::chsh();
    switch (opt.method) {
        case BoundMethod::Analytic: {
            std::function<double(double)> curve = opt.zero_curve;
            if (!curve) curve = [](double I) { return closed_form_chsh_zero(I); };
            cert.p_star = bound_shifted(cert.I_adj, chi, chsh.gamma(), curve);
            cert.method_detail =
                opt.zero_curve ? (opt.zero_curve_closed_form ? "analytic:custom-curve"
                                                             : "analytic:sdp-curve:" + opt.level)
                               : "analytic:closed-form";
            cert.certified = true;
            break;
        }
        case BoundMethod::Lp: {
            const double delta_eff =
                std::max(delta_hat, delta_from_chi(Scenario::chsh(), chi));
            cert.p_star = clip_guess_probability(p_star_lp(cert.I_adj, delta_eff).value);
            cert.method_detail = "lp";
            cert.certified = true;
            break;
        }
        case BoundMethod::Sdp: {
            SdpBoundOptions sopt;
            sopt.level = MonomialSet::level(opt.level);
            const auto r = p_star_sdp(cert.I_adj, chi, 0, 0, sopt);
            cert.p_star = r.value;
            cert.method_detail = "sdp:" + opt.level;
            cert.certified = r.report.has_certificate;
            break;
        }
    }
    cert.p_star = clip_guess_probability(cert.p_star);
    cert.min_entropy = -static_cast<double>(cfg.n) * std::log2(cert.p_star);

    const double slack = 2.0 * std::log2(1.0 / cfg.epsilon_sec);
    const double m_real = std::floor(cert.min_entropy) - std::ceil(slack);
    const std::uint64_t k = raw_bits.size;
    std::uint64_t m = 0;
    if (m_real > 0.0) m = std::min<std::uint64_t>(static_cast<std::uint64_t>(m_real), k);
    cert.input_bits = k;
    cert.output_length = m;

    cert.extractor_seed = cfg.seed ^ 0x9e3779b97f4a7c15ull;
    if (m > 0) {
        std::mt19937_64 srng(cert.extractor_seed);
        BitString tseed = BitString::zeros(m + k - 1);
        for (std::uint64_t i = 0; i < tseed.bytes.size(); ++i)
            tseed.bytes[i] = static_cast<std::uint8_t>(srng() & 0xff);
        // Mask padding bits in the last byte.
        const unsigned rem = tseed.size & 7;
        if (rem) tseed.bytes.back() &= static_cast<std::uint8_t>((1u << rem) - 1);
        const BitString out = toeplitz_extract(raw_bits, tseed, m);
        cert.output_bits = out.bytes;
    }
    return cert;
}

} // namespace

Certificate certify(const std::vector<TrialRecord>& records, double chi,
                    const ExperimentConfig& cfg, const CertifyOptions& opt) {
    const auto est = estimate(records, cfg.epsilon_sec);
    return certify_core(est.I_hat, est.delta_hat, est.confidence_radius,
                        records_to_bits(records), chi, cfg, opt);
}

Certificate certify_behavior(const Behavior& behavior, double chi, const ExperimentConfig& cfg,
                             const CertifyOptions& opt) {
    const auto chsh = BellExpression::chsh();
    const double I_hat = chsh.evaluate(behavior);
    const double delta_hat = signaling_delta(behavior).delta;
    // Sample outcome bits for extraction from the behavior itself.
    std::mt19937_64 rng(cfg.seed);
    BitString bits = BitString::zeros(2 * cfg.n);
    for (std::uint64_t t = 0; t < cfg.n; ++t) {
        const double ux = next_unit(rng);
        int setting = 3;
        double acc = 0.0;
        for (int s = 0; s < 4; ++s) {
            acc += cfg.input_distribution[s];
            if (ux < acc) {
                setting = s;
                break;
            }
        }
        const double uo = next_unit(rng);
        int outcome = 3;
        acc = 0.0;
        for (int o = 0; o < 4; ++o) {
            acc += behavior.p(o >> 1, o & 1, setting >> 1, setting & 1);
            if (uo < acc) {
                outcome = o;
                break;
            }
        }
        bits.set(2 * t, (outcome >> 1) & 1);
        bits.set(2 * t + 1, outcome & 1);
    }
    return certify_core(I_hat, delta_hat, 0.0, bits, chi, cfg, opt);
}

std::string Certificate::to_json() const {
    nlohmann::json j;
    j["I_hat"] = I_hat;
    j["I_adj"] = I_adj;
    j["delta_hat"] = delta_hat;
    j["chi"] = chi;
    j["method"] = std::string(to_string(method));
    j["method_detail"] = method_detail;
    j["p_star"] = p_star;
    j["certified"] = certified;
    j["min_entropy"] = min_entropy;
    j["n"] = n;
    j["epsilon_sec"] = epsilon_sec;
    j["seed"] = seed;
    j["extractor_seed"] = extractor_seed;
    j["input_bits"] = input_bits;
    j["output_length"] = output_length;
    BitString out;
    out.size = output_length;
    out.bytes = output_bits;
    j["output_bits_hex"] = out.to_hex();
    return j.dump(2);
}

std::string records_to_csv(const std::vector<TrialRecord>& records) {
    std::ostringstream os;
    os << "round,x,y,a,b\n";
    for (size_t i = 0; i < records.size(); ++i)
        os << i << ',' << int(records[i].x) << ',' << int(records[i].y) << ','
           << int(records[i].a) << ',' << int(records[i].b) << '\n';
    return os.str();
}

std::vector<TrialRecord> records_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("records csv: empty input");
    std::vector<TrialRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::uint64_t round;
        int x, y, a, b;
        char c;
        if (!(ls >> round >> c >> x >> c >> y >> c >> a >> c >> b))
            throw std::invalid_argument("records csv: malformed row: " + line);
        TrialRecord r;
        r.x = static_cast<std::uint8_t>(x);
        r.y = static_cast<std::uint8_t>(y);
        r.a = static_cast<std::uint8_t>(a);
        r.b = static_cast<std::uint8_t>(b);
        out.push_back(r);
    }
    return out;
}

} // namespace ctrg
