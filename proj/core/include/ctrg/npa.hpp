#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ctrg/bell.hpp"
#include "ctrg/sdp.hpp"

namespace ctrg {

// Operator alphabet for the 2-input/2-output scenario after outcome
// elimination: only the outcome-0 projector is kept per local setting
// (X_{1|x} = 1 - X_{0|x} is applied symbolically), while all 16 collective
// measurement operators stay explicit.
//
// Letter ids: 0,1 = A-side projectors (settings 0,1); 2,3 = B-side; 4..19 =
// collective Z(a,b|x,y).
using Letter = std::uint8_t;
using Word = std::vector<Letter>; // empty word = identity

inline constexpr Letter letter_proj_a(int x) { return static_cast<Letter>(x); }
inline constexpr Letter letter_proj_b(int y) { return static_cast<Letter>(2 + y); }
inline constexpr Letter letter_z(int a, int b, int x, int y) {
    return static_cast<Letter>(4 + (((x * 2 + y) * 2 + a) * 2 + b));
}
bool is_projector_a(Letter l);
bool is_projector_b(Letter l);
bool is_collective(Letter l);
/// For collective letters: recover (a,b,x,y).
std::array<int, 4> z_labels(Letter l);

/// Rewrite a word to its canonical fixpoint: adjacent equal projectors
/// collapse (idempotence), A- and B-side projectors commute (A sorted before
/// B inside every collective-free run), collective letters commute with
/// nothing.
Word canonicalize(Word w);
/// Canonical representative of the moment: min(canon(w), canon(reverse w)),
/// identifying a moment with its adjoint.
Word moment_representative(const Word& w);

std::string word_to_string(const Word& w);
Word word_from_string(const std::string& s);

/// Monomial sets defining the relaxation level. `moment_basis` spans the
/// moment matrix; localizing blocks use `loc_basis` plus, optionally, the
/// one-letter collective words of the block's own setting pair.
struct MonomialSet {
    std::string name;
    std::vector<Word> moment_basis;
    std::vector<Word> loc_basis;
    bool loc_same_setting_z = false;
    std::vector<Word> extra_moment_words; // appended to moment_basis

    /// Named levels: "l1", "l1xy", "l1xyzw", "l2r", "l2".
    static MonomialSet level(const std::string& name);
};

/// One symmetric block whose entries are affine in the moments and in the
/// cross-talk parameter: entry = (coef_const + chi*coef_chi) * y_var, with
/// var = -1 denoting the constant moment 1.
struct ParamEntry {
    int r = 0, c = 0;
    int var = -1;
    double coef_const = 0.0;
    double coef_chi = 0.0;
};

struct ParamBlock {
    int dim = 0;
    std::string label;
    std::vector<ParamEntry> entries;
};

/// A moment/localizing relaxation, stored with its chi dependence explicit
/// so a single build can be materialized at any cross-talk value.
struct RelaxationProblem {
    std::string description;
    MonomialSet level;
    bool chi_is_variable = false; // Eq-(6)-style: chi is the quantity sought
    double chi_fixed = 0.0;

    int num_vars = 0;
    bool maximize = true;
    std::vector<std::pair<int, double>> objective;
    std::vector<AffineRow> equalities;
    std::vector<AffineRow> lp_rows;
    std::vector<ParamBlock> blocks;
    std::vector<std::string> var_words;

    /// Materialize at a concrete cross-talk value.
    ConicProblem to_conic(double chi) const;
    ConicProblem to_conic() const;

    /// Self-describing JSON dump of the materialized problem.
    std::string to_json(double chi) const;

    int total_psd_dim() const;
};

/// Imported problem dump: the conic data plus the word labels.
struct ImportedProblem {
    ConicProblem conic;
    std::vector<std::string> var_words;
    std::string description;
};
ImportedProblem import_problem_json(const std::string& text);
std::string conic_to_json(const ConicProblem& p, const std::vector<std::string>& var_words,
                          const std::string& description);

struct NpaOptions {
    bool bell_as_lower_bound = false; // Bell constraint >= I instead of == I
    double pin_band = 1e-6;           // tolerance band for pinned behaviors
};

/// Eq.-(2)-type program: maximize the target pair probability given Bell
/// value I and cross-talk budget chi.
RelaxationProblem randomness_program(double I, double chi, std::array<int, 4> target_abxy,
                                     const MonomialSet& level, const NpaOptions& opt = {});

/// Eq.-(6)-type program: the behavior is pinned (within a band) and chi is
/// the decision quantity. Materialize with to_conic(chi) and search the
/// smallest feasible chi.
RelaxationProblem min_chi_program(const Behavior& p, const MonomialSet& level,
                                  const NpaOptions& opt = {});

/// Maximal Bell value under the chi-restricted collective measurements.
RelaxationProblem max_bell_given_chi(double chi, const MonomialSet& level,
                                     const NpaOptions& opt = {});

/// The signaling-only estimator delta / (2N).
double chi_lower_bound_simple(const Behavior& p);

} // namespace ctrg
