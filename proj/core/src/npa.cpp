#include "ctrg/npa.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ctrg/analytic.hpp"

namespace ctrg {

bool is_projector_a(Letter l) { return l < 2; }
bool is_projector_b(Letter l) { return l >= 2 && l < 4; }
bool is_collective(Letter l) { return l >= 4 && l < 20; }

std::array<int, 4> z_labels(Letter l) {
    if (!is_collective(l)) throw std::invalid_argument("z_labels: not a collective letter");
    const int v = l - 4;
    const int b = v & 1, a = (v >> 1) & 1, y = (v >> 2) & 1, x = (v >> 3) & 1;
    return {a, b, x, y};
}

Word canonicalize(Word w) {
    bool changed = true;
    while (changed) {
        changed = false;
        // Sort commuting neighbours: A-side before B-side within runs free of
        // collective letters.
        for (size_t i = 0; i + 1 < w.size(); ++i) {
            if (is_projector_b(w[i]) && is_projector_a(w[i + 1])) {
                std::swap(w[i], w[i + 1]);
                changed = true;
            }
        }
        // Idempotence of local projectors.
        for (size_t i = 0; i + 1 < w.size();) {
            if (w[i] == w[i + 1] && !is_collective(w[i])) {
                w.erase(w.begin() + static_cast<long>(i));
                changed = true;
                if (i > 0) --i;
            } else {
                ++i;
            }
        }
    }
    return w;
}

Word moment_representative(const Word& w) {
    Word a = canonicalize(w);
    Word r(a.rbegin(), a.rend());
    r = canonicalize(std::move(r));
    return std::min(a, r);
}

std::string word_to_string(const Word& w) {
    if (w.empty()) return "1";
    std::string out;
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) out += '.';
        const Letter l = w[i];
        if (is_projector_a(l)) {
            out += 'A';
            out += static_cast<char>('0' + l);
        } else if (is_projector_b(l)) {
            out += 'B';
            out += static_cast<char>('0' + (l - 2));
        } else {
            const auto [a, b, x, y] = z_labels(l);
            out += 'Z';
            out += static_cast<char>('0' + a);
            out += static_cast<char>('0' + b);
            out += '|';
            out += static_cast<char>('0' + x);
            out += static_cast<char>('0' + y);
        }
    }
    return out;
}

Word word_from_string(const std::string& s) {
    if (s == "1") return {};
    Word w;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, '.')) {
        if (tok.empty()) throw std::invalid_argument("word_from_string: empty letter");
        if (tok[0] == 'A' && tok.size() == 2) {
            w.push_back(letter_proj_a(tok[1] - '0'));
        } else if (tok[0] == 'B' && tok.size() == 2) {
            w.push_back(letter_proj_b(tok[1] - '0'));
        } else if (tok[0] == 'Z' && tok.size() == 6 && tok[3] == '|') {
            w.push_back(letter_z(tok[1] - '0', tok[2] - '0', tok[4] - '0', tok[5] - '0'));
        } else {
            throw std::invalid_argument("word_from_string: bad letter " + tok);
        }
    }
    return w;
}

namespace {

std::vector<Word> dedup_words(std::vector<Word> words) {
    for (auto& w : words) w = canonicalize(std::move(w));
    std::vector<Word> out;
    std::set<Word> seen;
    for (auto& w : words)
        if (seen.insert(w).second) out.push_back(w);
    return out;
}

} // namespace

MonomialSet MonomialSet::level(const std::string& name) {
    MonomialSet s;
    s.name = name;
    s.moment_basis.push_back({});
    for (Letter l = 0; l < 20; ++l) s.moment_basis.push_back({l});
    const std::vector<Word> locals5 = {{}, {0}, {1}, {2}, {3}};

    auto add_xy = [&] {
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y)
                s.moment_basis.push_back({letter_proj_a(x), letter_proj_b(y)});
    };
    auto add_zw_matched = [&] {
        for (Letter l = 4; l < 20; ++l) {
            const auto [a, b, x, y] = z_labels(l);
            (void)a;
            (void)b;
            s.moment_basis.push_back({l, letter_proj_a(x)});
            s.moment_basis.push_back({l, letter_proj_b(y)});
        }
    };

    if (name == "l1") {
        s.loc_basis = {{}};
    } else if (name == "l1xy") {
        add_xy();
        s.loc_basis = locals5;
    } else if (name == "l1xyzw") {
        add_xy();
        add_zw_matched();
        s.loc_basis = locals5;
        s.loc_same_setting_z = true;
    } else if (name == "l2r") {
        // Second order restricted to the local algebra: localizing bases
        // carry every local word of length <= 2, collective letters stay at
        // first order.
        add_xy();
        s.loc_basis = locals5;
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y)
                s.loc_basis.push_back({letter_proj_a(x), letter_proj_b(y)});
    } else if (name == "l2") {
        for (Letter l1 = 0; l1 < 20; ++l1)
            for (Letter l2 = 0; l2 < 20; ++l2) s.moment_basis.push_back({l1, l2});
        s.loc_basis.push_back({});
        for (Letter l = 0; l < 20; ++l) s.loc_basis.push_back({l});
    } else {
        throw std::invalid_argument("MonomialSet::level: unknown level " + name);
    }
    s.moment_basis = dedup_words(std::move(s.moment_basis));
    s.loc_basis = dedup_words(std::move(s.loc_basis));
    return s;
}

namespace {

using Poly = std::vector<std::pair<Word, double>>;

class Builder {
public:
    explicit Builder(RelaxationProblem& rp) : rp_(rp) {}

    // Moment id of a word; -1 denotes the constant moment <1> = 1.
    int id(const Word& w) {
        Word rep = moment_representative(w);
        if (rep.empty()) return -1;
        auto it = ids_.find(rep);
        if (it != ids_.end()) return it->second;
        const int nid = rp_.num_vars++;
        ids_.emplace(std::move(rep), nid);
        rp_.var_words.push_back(word_to_string(moment_representative(w)));
        return nid;
    }

    // Lookup without inserting; -2 when the moment is not registered.
    int lookup(const Word& w) const {
        Word rep = moment_representative(w);
        if (rep.empty()) return -1;
        auto it = ids_.find(rep);
        return it == ids_.end() ? -2 : it->second;
    }

    void add_block(const std::vector<Word>& basis, const Poly& poly, bool chi_identity,
                   const std::string& label) {
        ParamBlock blk;
        blk.dim = static_cast<int>(basis.size());
        blk.label = label;
        for (size_t i = 0; i < basis.size(); ++i) {
            Word left(basis[i].rbegin(), basis[i].rend());
            for (size_t j = i; j < basis.size(); ++j) {
                // Accumulate var -> (const, chi) coefficients for this entry.
                std::map<int, std::pair<double, double>> acc;
                for (const auto& [pw, coef] : poly) {
                    Word full = left;
                    full.insert(full.end(), pw.begin(), pw.end());
                    full.insert(full.end(), basis[j].begin(), basis[j].end());
                    acc[id(full)].first += coef;
                }
                if (chi_identity) {
                    Word full = left;
                    full.insert(full.end(), basis[j].begin(), basis[j].end());
                    acc[id(full)].second += 1.0;
                }
                for (const auto& [var, cc] : acc) {
                    if (std::abs(cc.first) < 1e-15 && std::abs(cc.second) < 1e-15) continue;
                    ParamEntry e;
                    e.r = static_cast<int>(j);
                    e.c = static_cast<int>(i);
                    e.var = var;
                    e.coef_const = cc.first;
                    e.coef_chi = cc.second;
                    blk.entries.push_back(e);
                }
            }
        }
        rp_.blocks.push_back(std::move(blk));
    }

    // Localizing basis for the block tied to setting pair (x,y).
    std::vector<Word> loc_basis_for(const MonomialSet& level, int x, int y) const {
        std::vector<Word> basis = level.loc_basis;
        if (level.loc_same_setting_z)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) basis.push_back({letter_z(a, b, x, y)});
        return dedup_words(std::move(basis));
    }

    // The product X_{a|x} Y_{b|y} expanded through outcome elimination.
    static Poly local_product(int a, int b, int x, int y) {
        const Letter X = letter_proj_a(x), Y = letter_proj_b(y);
        Poly p;
        if (a == 0 && b == 0) {
            p = {{{X, Y}, 1.0}};
        } else if (a == 0 && b == 1) {
            p = {{{X}, 1.0}, {{X, Y}, -1.0}};
        } else if (a == 1 && b == 0) {
            p = {{{Y}, 1.0}, {{X, Y}, -1.0}};
        } else {
            p = {{{}, 1.0}, {{X}, -1.0}, {{Y}, -1.0}, {{X, Y}, 1.0}};
        }
        return p;
    }

    void add_structure(const MonomialSet& level) {
        // Moment matrix.
        add_block(level.moment_basis, {{{}, 1.0}}, false, "moment");
        // Localizing blocks: Z >= 0 and chi*1 +- (Z - XY) >= 0 for all 16.
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) {
                const auto basis = loc_basis_for(level, x, y);
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        const Word zw = {letter_z(a, b, x, y)};
                        std::ostringstream tag;
                        tag << a << b << "|" << x << y;
                        add_block(basis, {{zw, 1.0}}, false, "pos:Z" + tag.str());
                        Poly dev = local_product(a, b, x, y);
                        // chi*1 - (Z - XY): -Z + XY terms.
                        Poly minus = dev;
                        minus.push_back({zw, -1.0});
                        add_block(basis, minus, true, "ct+:" + tag.str());
                        // chi*1 + (Z - XY)
                        Poly plus;
                        plus.reserve(dev.size() + 1);
                        for (auto& [w2, c2] : dev) plus.push_back({w2, -c2});
                        plus.push_back({zw, 1.0});
                        add_block(basis, plus, true, "ct-:" + tag.str());
                    }
            }
    }

    // POVM completeness contracted against word pairs whose moments already
    // exist: sum_ab <u' Z_{ab|xy} v> = <u' v>.
    void add_normalizations(const MonomialSet& level) {
        std::vector<Word> pool = level.moment_basis;
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) {
                const auto lb = loc_basis_for(level, x, y);
                pool.insert(pool.end(), lb.begin(), lb.end());
            }
        pool = dedup_words(std::move(pool));

        std::set<std::vector<std::pair<int, double>>> seen;
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y)
                for (size_t i = 0; i < pool.size(); ++i)
                    for (size_t j = i; j < pool.size(); ++j) {
                        Word left(pool[i].rbegin(), pool[i].rend());
                        Word uv = left;
                        uv.insert(uv.end(), pool[j].begin(), pool[j].end());
                        const int rhs_id = lookup(uv);
                        if (rhs_id == -2) continue;
                        std::map<int, double> row;
                        bool all_present = true;
                        double rhs = 0.0;
                        for (int a = 0; a < 2 && all_present; ++a)
                            for (int b = 0; b < 2 && all_present; ++b) {
                                Word full = left;
                                full.push_back(letter_z(a, b, x, y));
                                full.insert(full.end(), pool[j].begin(), pool[j].end());
                                const int vid = lookup(full);
                                if (vid == -2) {
                                    all_present = false;
                                } else if (vid == -1) {
                                    rhs -= 1.0;
                                } else {
                                    row[vid] += 1.0;
                                }
                            }
                        if (!all_present) continue;
                        if (rhs_id == -1)
                            rhs += 1.0;
                        else
                            row[rhs_id] -= 1.0;
                        std::vector<std::pair<int, double>> terms(row.begin(), row.end());
                        std::erase_if(terms, [](const auto& t) {
                            return std::abs(t.second) < 1e-15;
                        });
                        if (terms.empty()) continue;
                        if (!seen.insert(terms).second) continue;
                        AffineRow ar;
                        ar.terms = std::move(terms);
                        ar.constant = rhs;
                        rp_.equalities.push_back(std::move(ar));
                    }
    }

    void add_box_rows() {
        for (int k = 0; k < rp_.num_vars; ++k) {
            AffineRow hi;
            hi.constant = 1.0;
            hi.terms = {{k, -1.0}};
            rp_.lp_rows.push_back(std::move(hi));
            AffineRow lo;
            lo.constant = 1.0;
            lo.terms = {{k, 1.0}};
            rp_.lp_rows.push_back(std::move(lo));
        }
    }

    void add_bell_constraint(double I, bool as_lower_bound) {
        const auto chsh = BellExpression::chsh();
        std::map<int, double> row;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int x = 0; x < 2; ++x)
                    for (int y = 0; y < 2; ++y)
                        row[id({letter_z(a, b, x, y)})] += chsh.coeff(a, b, x, y);
        if (as_lower_bound) {
            AffineRow r;
            r.terms.assign(row.begin(), row.end());
            r.constant = -I; // sum c y - I >= 0
            rp_.lp_rows.push_back(std::move(r));
        } else {
            AffineRow r;
            r.terms.assign(row.begin(), row.end());
            r.constant = I;
            rp_.equalities.push_back(std::move(r));
        }
    }

private:
    RelaxationProblem& rp_;
    std::map<Word, int> ids_;
};

void validate_level(const MonomialSet& level) {
    if (level.moment_basis.empty())
        throw std::invalid_argument("relaxation: empty monomial set");
    if (std::find(level.moment_basis.begin(), level.moment_basis.end(), Word{}) ==
        level.moment_basis.end())
        throw std::invalid_argument("relaxation: moment basis must contain the identity");
}

MonomialSet with_extras(MonomialSet level) {
    for (const auto& w : level.extra_moment_words) level.moment_basis.push_back(w);
    level.moment_basis = dedup_words(std::move(level.moment_basis));
    return level;
}

} // namespace

ConicProblem RelaxationProblem::to_conic(double chi) const {
    ConicProblem cp;
    cp.num_vars = num_vars;
    cp.maximize = maximize;
    cp.objective = objective;
    cp.equalities = equalities;
    cp.lp_rows = lp_rows;
    cp.var_abs_bound.assign(num_vars, 1.0);
    for (const auto& blk : blocks) {
        PsdBlock pb;
        pb.dim = blk.dim;
        pb.label = blk.label;
        std::map<int, std::vector<SymEntry>> per_var;
        for (const auto& e : blk.entries) {
            const double v = e.coef_const + chi * e.coef_chi;
            if (std::abs(v) < 1e-15) continue;
            per_var[e.var].push_back(SymEntry{e.r, e.c, v});
        }
        for (auto& [var, entries] : per_var) {
            if (var == -1)
                pb.constant = std::move(entries);
            else
                pb.terms.emplace_back(var, std::move(entries));
        }
        cp.psd_blocks.push_back(std::move(pb));
    }
    return cp;
}

ConicProblem RelaxationProblem::to_conic() const {
    if (chi_is_variable)
        throw std::logic_error("RelaxationProblem: chi is a decision quantity; "
                               "materialize with to_conic(chi)");
    return to_conic(chi_fixed);
}

int RelaxationProblem::total_psd_dim() const {
    int t = 0;
    for (const auto& b : blocks) t += b.dim;
    return t;
}

std::string conic_to_json(const ConicProblem& p, const std::vector<std::string>& var_words,
                          const std::string& description) {
    nlohmann::json j;
    j["format"] = "ctrg-conic/1";
    j["description"] = description;
    j["num_vars"] = p.num_vars;
    j["maximize"] = p.maximize;
    j["variables"] = var_words;
    {
        nlohmann::json t = nlohmann::json::array();
        for (const auto& [k, v] : p.objective) t.push_back({k, v});
        j["objective"] = std::move(t);
    }
    {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : p.equalities) {
            nlohmann::json jr;
            nlohmann::json terms = nlohmann::json::array();
            for (const auto& [k, v] : r.terms) terms.push_back({k, v});
            jr["terms"] = std::move(terms);
            jr["rhs"] = r.constant;
            rows.push_back(std::move(jr));
        }
        j["equalities"] = std::move(rows);
    }
    {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : p.lp_rows) {
            nlohmann::json jr;
            nlohmann::json terms = nlohmann::json::array();
            for (const auto& [k, v] : r.terms) terms.push_back({k, v});
            jr["terms"] = std::move(terms);
            jr["constant"] = r.constant;
            rows.push_back(std::move(jr));
        }
        j["lp_rows"] = std::move(rows);
    }
    {
        nlohmann::json blocks = nlohmann::json::array();
        for (const auto& blk : p.psd_blocks) {
            nlohmann::json jb;
            jb["dim"] = blk.dim;
            jb["label"] = blk.label;
            nlohmann::json entries = nlohmann::json::array();
            for (const auto& e : blk.constant) entries.push_back({e.r, e.c, -1, e.v});
            for (const auto& [var, ents] : blk.terms)
                for (const auto& e : ents) entries.push_back({e.r, e.c, var, e.v});
            jb["entries"] = std::move(entries);
            blocks.push_back(std::move(jb));
        }
        j["psd_blocks"] = std::move(blocks);
    }
    return j.dump();
}

std::string RelaxationProblem::to_json(double chi) const {
    return conic_to_json(to_conic(chi), var_words, description);
}

ImportedProblem import_problem_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (!j.contains("format") || j["format"] != "ctrg-conic/1")
        throw std::invalid_argument("problem import: unknown format");
    ImportedProblem out;
    out.description = j.value("description", "");
    out.conic.num_vars = j["num_vars"].get<int>();
    out.conic.maximize = j["maximize"].get<bool>();
    for (const auto& w : j["variables"]) out.var_words.push_back(w.get<std::string>());
    for (const auto& t : j["objective"])
        out.conic.objective.emplace_back(t.at(0).get<int>(), t.at(1).get<double>());
    for (const auto& r : j["equalities"]) {
        AffineRow ar;
        for (const auto& t : r["terms"])
            ar.terms.emplace_back(t.at(0).get<int>(), t.at(1).get<double>());
        ar.constant = r["rhs"].get<double>();
        out.conic.equalities.push_back(std::move(ar));
    }
    for (const auto& r : j["lp_rows"]) {
        AffineRow ar;
        for (const auto& t : r["terms"])
            ar.terms.emplace_back(t.at(0).get<int>(), t.at(1).get<double>());
        ar.constant = r["constant"].get<double>();
        out.conic.lp_rows.push_back(std::move(ar));
    }
    for (const auto& b : j["psd_blocks"]) {
        PsdBlock pb;
        pb.dim = b["dim"].get<int>();
        pb.label = b.value("label", "");
        std::map<int, std::vector<SymEntry>> per_var;
        for (const auto& e : b["entries"]) {
            SymEntry se{e.at(0).get<int>(), e.at(1).get<int>(), e.at(3).get<double>()};
            per_var[e.at(2).get<int>()].push_back(se);
        }
        for (auto& [var, ents] : per_var) {
            if (var == -1)
                pb.constant = std::move(ents);
            else
                pb.terms.emplace_back(var, std::move(ents));
        }
        out.conic.psd_blocks.push_back(std::move(pb));
    }
    out.conic.var_abs_bound.assign(out.conic.num_vars, 1.0);
    return out;
}

RelaxationProblem randomness_program(double I, double chi, std::array<int, 4> target,
                                     const MonomialSet& level_in, const NpaOptions& opt) {
    if (chi < 0.0 || chi > 1.0)
        throw std::invalid_argument("randomness_program: chi outside [0,1]");
    if (std::abs(I) > kChshAlgebraic + 1e-12)
        throw std::invalid_argument("randomness_program: I outside [-4,4]");
    for (int v : target)
        if (v < 0 || v > 1) throw std::invalid_argument("randomness_program: bad target");
    const auto level = with_extras(level_in);
    validate_level(level);

    RelaxationProblem rp;
    rp.level = level;
    rp.chi_fixed = chi;
    rp.maximize = true;
    {
        std::ostringstream d;
        d << "max P(" << target[0] << target[1] << "|" << target[2] << target[3]
          << ") given I=" << I << " chi=" << chi << " level=" << level.name;
        rp.description = d.str();
    }
    Builder b(rp);
    b.add_structure(level);
    b.add_bell_constraint(I, opt.bell_as_lower_bound);
    b.add_normalizations(level);
    rp.objective = {
        {b.id({letter_z(target[0], target[1], target[2], target[3])}), 1.0}};
    b.add_box_rows();
    return rp;
}

RelaxationProblem min_chi_program(const Behavior& p, const MonomialSet& level_in,
                                  const NpaOptions& opt) {
    if (!p.is_valid(1e-6, 1e-9))
        throw std::invalid_argument("min_chi_program: invalid behavior");
    const auto level = with_extras(level_in);
    validate_level(level);

    RelaxationProblem rp;
    rp.level = level;
    rp.chi_is_variable = true;
    rp.maximize = true;
    rp.description = "min chi compatible with pinned behavior, level=" + level.name;
    Builder b(rp);
    b.add_structure(level);
    b.add_normalizations(level);
    // Pin the observed behavior within the tolerance band.
    for (int a = 0; a < 2; ++a)
        for (int bb = 0; bb < 2; ++bb)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y) {
                    const int vid = b.id({letter_z(a, bb, x, y)});
                    const double target = p.p(a, bb, x, y);
                    if (opt.pin_band <= 0.0) {
                        AffineRow r;
                        r.terms = {{vid, 1.0}};
                        r.constant = target;
                        rp.equalities.push_back(std::move(r));
                    } else {
                        AffineRow hi; // band: target + eps - y >= 0
                        hi.terms = {{vid, -1.0}};
                        hi.constant = target + opt.pin_band;
                        rp.lp_rows.push_back(std::move(hi));
                        AffineRow lo; // y - target + eps >= 0
                        lo.terms = {{vid, 1.0}};
                        lo.constant = opt.pin_band - target;
                        rp.lp_rows.push_back(std::move(lo));
                    }
                }
    b.add_box_rows();
    return rp;
}

RelaxationProblem max_bell_given_chi(double chi, const MonomialSet& level_in,
                                     const NpaOptions& opt) {
    (void)opt;
    if (chi < 0.0 || chi > 1.0)
        throw std::invalid_argument("max_bell_given_chi: chi outside [0,1]");
    const auto level = with_extras(level_in);
    validate_level(level);

    RelaxationProblem rp;
    rp.level = level;
    rp.chi_fixed = chi;
    rp.maximize = true;
    {
        std::ostringstream d;
        d << "max CHSH given chi=" << chi << " level=" << level.name;
        rp.description = d.str();
    }
    Builder b(rp);
    b.add_structure(level);
    b.add_normalizations(level);
    const auto chsh = BellExpression::chsh();
    std::map<int, double> row;
    for (int a = 0; a < 2; ++a)
        for (int bb = 0; bb < 2; ++bb)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y)
                    row[b.id({letter_z(a, bb, x, y)})] += chsh.coeff(a, bb, x, y);
    rp.objective.assign(row.begin(), row.end());
    b.add_box_rows();
    return rp;
}

double chi_lower_bound_simple(const Behavior& p) {
    return signaling_delta(p).delta / (2.0 * p.scenario().outputs_per_input);
}

} // namespace ctrg
