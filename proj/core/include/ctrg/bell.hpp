#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ctrg {

/// Bell scenario shape: number of measurement settings per party and number
/// of outcomes per setting (2 and 2 for CHSH).
struct Scenario {
    int inputs_per_party = 2;
    int outputs_per_input = 2;

    Scenario() = default;
    Scenario(int inputs, int outputs);
    bool operator==(const Scenario&) const = default;
    static Scenario chsh() { return Scenario(2, 2); }
};

/// The conditional probabilities P(a,b|x,y) of a bipartite Bell experiment.
/// Only the joint table is stored; marginals are recomputed on demand.
class Behavior {
public:
    Behavior() : Behavior(Scenario::chsh()) {}
    explicit Behavior(Scenario s);

    const Scenario& scenario() const { return sc_; }
    double& p(int a, int b, int x, int y) { return p_[index(a, b, x, y)]; }
    double p(int a, int b, int x, int y) const { return p_[index(a, b, x, y)]; }

    double marginal_a(int a, int x, int y) const; // sum_b P(a,b|x,y)
    double marginal_b(int b, int x, int y) const; // sum_a P(a,b|x,y)

    /// Normalization and nonnegativity checks per the type invariants.
    bool is_valid(double norm_tol = 1e-9, double neg_tol = 1e-12) const;
    /// Clip small negative entries (>= -1e-9) to zero and renormalize each
    /// setting pair. Entries more negative than the floor are rejected.
    void clip_and_renormalize(double neg_floor = 1e-9);

    std::string to_json() const;
    static Behavior from_json(const std::string& text);
    std::string to_csv() const;
    static Behavior from_csv(const std::string& text);

    size_t index(int a, int b, int x, int y) const;

private:
    Scenario sc_;
    std::vector<double> p_;
};

/// A linear functional sum c(a,b,x,y) P(a,b|x,y) together with its
/// coefficient mass gamma = sum |c|.
class BellExpression {
public:
    explicit BellExpression(Scenario s);
    static BellExpression chsh();

    const Scenario& scenario() const { return sc_; }
    double coeff(int a, int b, int x, int y) const { return c_[index(a, b, x, y)]; }
    void set_coeff(int a, int b, int x, int y, double v);
    double gamma() const { return gamma_; }

    double evaluate(const Behavior& p) const;

private:
    size_t index(int a, int b, int x, int y) const;
    Scenario sc_;
    std::vector<double> c_;
    double gamma_ = 0.0;
};

struct SignalingDelta {
    double delta = 0.0;
};

/// Largest change of one party's output marginal under the other party's
/// input choice.
SignalingDelta signaling_delta(const Behavior& p);

/// Signaling bound implied by a cross-talk budget: 2 * N * chi.
double delta_from_chi(const Scenario& s, double chi);

// Reference boxes.
Behavior pr_box();
Behavior uniform_box();
/// Local deterministic box a = fa[x], b = fb[y].
Behavior deterministic_box(const std::vector<int>& fa, const std::vector<int>& fb);
/// Maximally signaling box: a always equals y (b fixed to 0).
Behavior max_signaling_box();
/// Convex mixture w*p + (1-w)*q.
Behavior mix(const Behavior& p, const Behavior& q, double w);

} // namespace ctrg
