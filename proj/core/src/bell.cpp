#include "ctrg/bell.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ctrg {

using nlohmann::json;

Scenario::Scenario(int inputs, int outputs)
    : inputs_per_party(inputs), outputs_per_input(outputs) {
    if (inputs < 2 || outputs < 2)
        throw std::invalid_argument("Scenario: a Bell test needs >= 2 inputs and >= 2 outputs");
}

Behavior::Behavior(Scenario s)
    : sc_(s),
      p_(static_cast<size_t>(s.outputs_per_input) * s.outputs_per_input *
             s.inputs_per_party * s.inputs_per_party,
         0.0) {}

size_t Behavior::index(int a, int b, int x, int y) const {
    const int no = sc_.outputs_per_input, ni = sc_.inputs_per_party;
    if (a < 0 || a >= no || b < 0 || b >= no || x < 0 || x >= ni || y < 0 || y >= ni)
        throw std::out_of_range("Behavior: index out of range");
    return ((static_cast<size_t>(a) * no + b) * ni + x) * ni + y;
}

double Behavior::marginal_a(int a, int x, int y) const {
    double s = 0.0;
    for (int b = 0; b < sc_.outputs_per_input; ++b) s += p(a, b, x, y);
    return s;
}

double Behavior::marginal_b(int b, int x, int y) const {
    double s = 0.0;
    for (int a = 0; a < sc_.outputs_per_input; ++a) s += p(a, b, x, y);
    return s;
}

bool Behavior::is_valid(double norm_tol, double neg_tol) const {
    const int no = sc_.outputs_per_input, ni = sc_.inputs_per_party;
    for (const double v : p_)
        if (v < -neg_tol) return false;
    for (int x = 0; x < ni; ++x)
        for (int y = 0; y < ni; ++y) {
            double s = 0.0;
            for (int a = 0; a < no; ++a)
                for (int b = 0; b < no; ++b) s += p(a, b, x, y);
            if (std::abs(s - 1.0) > norm_tol) return false;
        }
    return true;
}

void Behavior::clip_and_renormalize(double neg_floor) {
    const int no = sc_.outputs_per_input, ni = sc_.inputs_per_party;
    for (const double v : p_)
        if (v < -neg_floor)
            throw std::invalid_argument("Behavior: entry below the clipping floor");
    for (int x = 0; x < ni; ++x)
        for (int y = 0; y < ni; ++y) {
            double s = 0.0;
            for (int a = 0; a < no; ++a)
                for (int b = 0; b < no; ++b) {
                    double& v = p_[index(a, b, x, y)];
                    if (v < 0.0) v = 0.0;
                    s += v;
                }
            if (s <= 0.0) throw std::invalid_argument("Behavior: empty setting pair");
            for (int a = 0; a < no; ++a)
                for (int b = 0; b < no; ++b) p_[index(a, b, x, y)] /= s;
        }
}

std::string Behavior::to_json() const {
    const int no = sc_.outputs_per_input, ni = sc_.inputs_per_party;
    json arr = json::array();
    for (int a = 0; a < no; ++a) {
        json ja = json::array();
        for (int b = 0; b < no; ++b) {
            json jb = json::array();
            for (int x = 0; x < ni; ++x) {
                json jx = json::array();
                for (int y = 0; y < ni; ++y) jx.push_back(p(a, b, x, y));
                jb.push_back(std::move(jx));
            }
            ja.push_back(std::move(jb));
        }
        arr.push_back(std::move(ja));
    }
    json out;
    out["p"] = std::move(arr);
    return out.dump();
}

Behavior Behavior::from_json(const std::string& text) {
    json in = json::parse(text);
    if (!in.contains("p")) throw std::invalid_argument("behavior json: missing key \"p\"");
    const json& arr = in["p"];
    const int no = static_cast<int>(arr.size());
    if (no < 2) throw std::invalid_argument("behavior json: bad outcome dimension");
    const int ni = static_cast<int>(arr.at(0).at(0).size());
    Behavior beh(Scenario(ni, no));
    for (int a = 0; a < no; ++a)
        for (int b = 0; b < no; ++b)
            for (int x = 0; x < ni; ++x)
                for (int y = 0; y < ni; ++y)
                    beh.p(a, b, x, y) = arr.at(a).at(b).at(x).at(y).get<double>();
    return beh;
}

std::string Behavior::to_csv() const {
    const int no = sc_.outputs_per_input, ni = sc_.inputs_per_party;
    std::ostringstream os;
    os << "a,b,x,y,p\n";
    os.precision(17);
    for (int a = 0; a < no; ++a)
        for (int b = 0; b < no; ++b)
            for (int x = 0; x < ni; ++x)
                for (int y = 0; y < ni; ++y)
                    os << a << ',' << b << ',' << x << ',' << y << ',' << p(a, b, x, y) << '\n';
    return os.str();
}

Behavior Behavior::from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("behavior csv: empty input");
    struct Row {
        int a, b, x, y;
        double v;
    };
    std::vector<Row> rows;
    int max_out = 0, max_in = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        Row r{};
        char c;
        std::istringstream ls(line);
        if (!(ls >> r.a >> c >> r.b >> c >> r.x >> c >> r.y >> c >> r.v))
            throw std::invalid_argument("behavior csv: malformed row: " + line);
        rows.push_back(r);
        max_out = std::max({max_out, r.a, r.b});
        max_in = std::max({max_in, r.x, r.y});
    }
    Behavior beh(Scenario(max_in + 1, max_out + 1));
    for (const auto& r : rows) beh.p(r.a, r.b, r.x, r.y) = r.v;
    return beh;
}

BellExpression::BellExpression(Scenario s)
    : sc_(s),
      c_(static_cast<size_t>(s.outputs_per_input) * s.outputs_per_input *
             s.inputs_per_party * s.inputs_per_party,
         0.0) {}

size_t BellExpression::index(int a, int b, int x, int y) const {
    const int no = sc_.outputs_per_input, ni = sc_.inputs_per_party;
    return ((static_cast<size_t>(a) * no + b) * ni + x) * ni + y;
}

void BellExpression::set_coeff(int a, int b, int x, int y, double v) {
    gamma_ -= std::abs(c_[index(a, b, x, y)]);
    c_[index(a, b, x, y)] = v;
    gamma_ += std::abs(v);
}

BellExpression BellExpression::chsh() {
    BellExpression e{Scenario::chsh()};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y)
                    e.set_coeff(a, b, x, y, ((a ^ b ^ (x & y)) != 0) ? -1.0 : 1.0);
    return e;
}

double BellExpression::evaluate(const Behavior& p) const {
    if (!(p.scenario() == sc_))
        throw std::invalid_argument("BellExpression::evaluate: scenario mismatch");
    const int no = sc_.outputs_per_input, ni = sc_.inputs_per_party;
    double s = 0.0;
    for (int a = 0; a < no; ++a)
        for (int b = 0; b < no; ++b)
            for (int x = 0; x < ni; ++x)
                for (int y = 0; y < ni; ++y) s += coeff(a, b, x, y) * p.p(a, b, x, y);
    return s;
}

SignalingDelta signaling_delta(const Behavior& p) {
    const auto& sc = p.scenario();
    const int no = sc.outputs_per_input, ni = sc.inputs_per_party;
    double d = 0.0;
    for (int a = 0; a < no; ++a)
        for (int x = 0; x < ni; ++x)
            for (int y = 0; y < ni; ++y)
                for (int y2 = y + 1; y2 < ni; ++y2)
                    d = std::max(d, std::abs(p.marginal_a(a, x, y) - p.marginal_a(a, x, y2)));
    for (int b = 0; b < no; ++b)
        for (int y = 0; y < ni; ++y)
            for (int x = 0; x < ni; ++x)
                for (int x2 = x + 1; x2 < ni; ++x2)
                    d = std::max(d, std::abs(p.marginal_b(b, x, y) - p.marginal_b(b, x2, y)));
    return SignalingDelta{d};
}

double delta_from_chi(const Scenario& s, double chi) {
    if (chi < 0.0 || chi > 1.0) throw std::invalid_argument("delta_from_chi: chi outside [0,1]");
    return 2.0 * s.outputs_per_input * chi;
}

Behavior pr_box() {
    Behavior b;
    for (int a = 0; a < 2; ++a)
        for (int bb = 0; bb < 2; ++bb)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y)
                    b.p(a, bb, x, y) = ((a ^ bb) == (x & y)) ? 0.5 : 0.0;
    return b;
}

Behavior uniform_box() {
    Behavior b;
    for (int a = 0; a < 2; ++a)
        for (int bb = 0; bb < 2; ++bb)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y) b.p(a, bb, x, y) = 0.25;
    return b;
}

Behavior deterministic_box(const std::vector<int>& fa, const std::vector<int>& fb) {
    Behavior b;
    if (fa.size() != 2 || fb.size() != 2)
        throw std::invalid_argument("deterministic_box: need one outcome per setting");
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) b.p(fa[x], fb[y], x, y) = 1.0;
    return b;
}

Behavior max_signaling_box() {
    Behavior b;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) b.p(y, 0, x, y) = 1.0;
    return b;
}

Behavior mix(const Behavior& p, const Behavior& q, double w) {
    if (!(p.scenario() == q.scenario())) throw std::invalid_argument("mix: scenario mismatch");
    Behavior out(p.scenario());
    const auto& sc = p.scenario();
    for (int a = 0; a < sc.outputs_per_input; ++a)
        for (int b = 0; b < sc.outputs_per_input; ++b)
            for (int x = 0; x < sc.inputs_per_party; ++x)
                for (int y = 0; y < sc.inputs_per_party; ++y)
                    out.p(a, b, x, y) = w * p.p(a, b, x, y) + (1.0 - w) * q.p(a, b, x, y);
    return out;
}

} // namespace ctrg
