// Command-line front end: bound evaluation, curve sweeps, cross-talk
// estimation, end-to-end certification, and region boundary data.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctrg/analytic.hpp"
#include "ctrg/bell.hpp"
#include "ctrg/lp.hpp"
#include "ctrg/models.hpp"
#include "ctrg/npa.hpp"
#include "ctrg/npa_bounds.hpp"
#include "ctrg/pipeline.hpp"
#include "ctrg/sdp.hpp"

namespace {

using nlohmann::json;

int thread_budget(int jobs) {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CTRG_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) n = v;
    }
    if (n < 1) n = 1;
    return std::min(n, jobs);
}

// Runs fn(i) for i in [0, jobs); results are collected by index so output
// order never depends on scheduling.
template <typename Fn>
void parallel_for(int jobs, Fn&& fn) {
    const int workers = thread_budget(jobs);
    if (workers <= 1) {
        for (int i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= jobs) break;
                fn(i);
            }
        });
    for (auto& t : pool) t.join();
}

std::string fmt10(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << content;
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::invalid_argument("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

ctrg::Behavior load_behavior(const std::string& path) {
    const std::string text = read_file(path);
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
        return ctrg::Behavior::from_csv(text);
    return ctrg::Behavior::from_json(text);
}

ctrg::DeviceModel make_model(const std::string& name, double epsilon, double pA, double pB) {
    if (name == "ideal") return ctrg::ion_model({0.0});
    if (name == "ion") return ctrg::ion_model({epsilon});
    if (name == "josephson") return ctrg::josephson_model({pA, pB});
    if (name == "deterministic") return ctrg::deterministic_model();
    throw std::invalid_argument("unknown model " + name);
}

// The chi = 0 curve evaluated at one shifted point; the analytic bound only
// ever consults a single curve value.
double zero_curve_value(const std::string& kind, const std::string& level, double I) {
    if (kind == "closed-form") return ctrg::closed_form_chsh_zero(I);
    if (kind == "sdp") {
        ctrg::SdpBoundOptions opt;
        opt.level = ctrg::MonomialSet::level(level);
        return ctrg::p_star_sdp(I, 0.0, 0, 0, opt).value;
    }
    throw std::invalid_argument("unknown zero-curve " + kind);
}

struct ConfigEcho {
    json j;
    explicit ConfigEcho(const std::string& command) { j["command"] = command; }
    template <typename T>
    void set(const std::string& k, const T& v) {
        j[k] = v;
    }
    void print() const { std::cout << j.dump() << "\n"; }
};

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

int cmd_bound(double I, double chi, double delta, bool delta_given, const std::string& method,
              const std::string& level, const std::string& zero_curve, bool bell_geq,
              const std::string& export_problem) {
    ConfigEcho echo("bound");
    echo.set("I", I);
    echo.set("chi", chi);
    if (delta_given) echo.set("delta", delta);
    echo.set("method", method);
    echo.set("level", level);
    echo.set("zero_curve", zero_curve);
    echo.set("bell_geq", bell_geq);
    echo.print();

    double value = 1.0;
    bool certified = true;
    std::string detail;
    if (method == "analytic") {
        if (delta_given && chi == 0.0) {
            value = ctrg::bound_signaling(I, delta);
            detail = "signaling bound";
        } else {
            const auto curve = [&](double shifted) {
                return zero_curve_value(zero_curve, level, shifted);
            };
            value = ctrg::bound_shifted(I, chi, ctrg::BellExpression::chsh().gamma(), curve);
            detail = "shifted bound, zero-curve=" + zero_curve;
        }
    } else if (method == "lp") {
        const double d = delta_given ? delta : ctrg::delta_from_chi(ctrg::Scenario::chsh(), chi);
        value = ctrg::clip_guess_probability(ctrg::p_star_lp(I, d).value);
        detail = "lp at delta=" + fmt10(d);
    } else if (method == "sdp") {
        ctrg::SdpBoundOptions opt;
        opt.level = ctrg::MonomialSet::level(level);
        opt.npa.bell_as_lower_bound = bell_geq;
        if (!export_problem.empty()) {
            auto rp = ctrg::randomness_program(I, chi, {0, 0, 0, 0}, opt.level, opt.npa);
            write_file(export_problem, rp.to_json(chi));
        }
        const auto r = ctrg::p_star_sdp(I, chi, 0, 0, opt);
        value = r.value;
        certified = r.report.has_certificate;
        detail = std::string("sdp level=") + level + ", " + ctrg::to_string(r.report.status);
    } else {
        throw std::invalid_argument("unknown method " + method);
    }
    std::cout << "P* = " << fmt10(value) << " (method=" << method << ", " << detail
              << ", certified=" << (certified ? "yes" : "no") << ")\n";
    return certified ? 0 : kExitNumerical;
}

int cmd_curve(double chi, double i_min, double i_max, int steps, const std::string& methods_csv,
              const std::string& level, const std::string& out) {
    if (steps < 2) throw std::invalid_argument("curve: need at least 2 steps");
    ConfigEcho echo("curve");
    echo.set("chi", chi);
    echo.set("I_min", i_min);
    echo.set("I_max", i_max);
    echo.set("steps", steps);
    echo.set("methods", methods_csv);
    echo.set("level", level);
    if (!out.empty()) echo.set("out", out);
    echo.print();

    std::vector<std::string> methods;
    {
        std::stringstream ss(methods_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) methods.push_back(tok);
    }
    for (const auto& m : methods)
        if (m != "zero" && m != "sdp" && m != "shifted")
            throw std::invalid_argument("unknown curve method " + m);

    ctrg::SdpBoundOptions opt;
    opt.level = ctrg::MonomialSet::level(level);
    const double gamma = ctrg::BellExpression::chsh().gamma();

    struct Row {
        double I = 0.0;
        std::map<std::string, double> vals;
        bool failed = false;
    };
    std::vector<Row> rows(steps);
    std::atomic<bool> any_failed{false};
    parallel_for(steps, [&](int i) {
        Row& row = rows[i];
        row.I = i_min + (i_max - i_min) * i / (steps - 1);
        for (const auto& m : methods) {
            try {
                if (m == "zero") {
                    row.vals[m] = ctrg::p_star_sdp(row.I, 0.0, 0, 0, opt).value;
                } else if (m == "sdp") {
                    row.vals[m] = ctrg::p_star_sdp(row.I, chi, 0, 0, opt).value;
                } else {
                    row.vals[m] = ctrg::bound_shifted(row.I, chi, gamma, [](double s) {
                        return ctrg::closed_form_chsh_zero(s);
                    });
                }
            } catch (const std::exception&) {
                row.failed = true;
                any_failed = true;
            }
        }
    });

    std::ostringstream os;
    os << "I";
    for (const auto& m : methods) os << ',' << m;
    os << ",status\n";
    for (const auto& row : rows) {
        os << fmt10(row.I);
        for (const auto& m : methods) {
            auto it = row.vals.find(m);
            os << ',' << (it == row.vals.end() ? "nan" : fmt10(it->second));
        }
        os << ',' << (row.failed ? "failed" : "ok") << '\n';
    }
    if (out.empty())
        std::cout << os.str();
    else
        write_file(out, os.str());
    return any_failed ? kExitNumerical : 0;
}

int cmd_chi(const std::string& behavior_path, const std::string& model, double epsilon,
            double pA, double pB, const std::string& level, bool skip_di) {
    ConfigEcho echo("chi");
    if (!behavior_path.empty()) echo.set("behavior", behavior_path);
    if (!model.empty()) {
        echo.set("model", model);
        if (model == "ion") echo.set("epsilon", epsilon);
        if (model == "josephson") {
            echo.set("pA", pA);
            echo.set("pB", pB);
        }
    }
    echo.set("level", level);
    echo.print();

    if (behavior_path.empty() == model.empty())
        throw std::invalid_argument("chi: give exactly one of --behavior or --model");

    if (!model.empty()) {
        if (model == "ion") {
            std::cout << "model chi upper bound = " << fmt10(ctrg::ion_chi_bound({epsilon}))
                      << "\n";
            const auto beh = ctrg::born_behavior(ctrg::ion_model({epsilon}));
            std::cout << "born delta/2N lower bound = "
                      << fmt10(ctrg::chi_lower_bound_simple(beh)) << "\n";
        } else if (model == "josephson") {
            const auto r = ctrg::josephson_chi_bound({pA, pB});
            std::cout << "model chi upper bound = " << fmt10(r.chi)
                      << " (q_A=" << fmt10(r.argmin.q_a) << ", q_B=" << fmt10(r.argmin.q_b)
                      << ")\n";
            const auto beh = ctrg::born_behavior(ctrg::josephson_model({pA, pB}));
            std::cout << "born delta/2N lower bound = "
                      << fmt10(ctrg::chi_lower_bound_simple(beh)) << "\n";
        } else {
            throw std::invalid_argument("unknown model " + model);
        }
        return 0;
    }

    auto beh = load_behavior(behavior_path);
    beh.clip_and_renormalize();
    std::cout << "delta/2N lower bound = " << fmt10(ctrg::chi_lower_bound_simple(beh)) << "\n";
    if (!skip_di) {
        ctrg::SdpBoundOptions opt;
        opt.level = ctrg::MonomialSet::level(level);
        const auto r = ctrg::min_chi_sdp(beh, opt);
        std::cout << "min-chi certified lower bound = " << fmt10(r.certified_lower)
                  << (r.lower_is_certified ? "" : " (vacuous)") << "\n";
        std::cout << "min-chi feasible at = " << fmt10(r.feasible_upper) << "\n";
    }
    return 0;
}

int cmd_certify(const std::string& model, double epsilon, double pA, double pB, std::uint64_t n,
                std::uint64_t seed, double chi, const std::string& method,
                const std::string& level, const std::string& zero_curve, double eps_sec,
                const std::string& out_dir, bool save_records) {
    ConfigEcho echo("certify");
    echo.set("model", model);
    if (model == "ion") echo.set("epsilon", epsilon);
    if (model == "josephson") {
        echo.set("pA", pA);
        echo.set("pB", pB);
    }
    echo.set("n", n);
    echo.set("seed", seed);
    echo.set("chi", chi);
    echo.set("method", method);
    echo.set("level", level);
    echo.set("zero_curve", zero_curve);
    echo.set("eps_sec", eps_sec);
    echo.set("out_dir", out_dir);
    echo.print();

    const auto dev = make_model(model, epsilon, pA, pB);
    ctrg::ExperimentConfig cfg;
    cfg.n = n;
    cfg.seed = seed;
    cfg.epsilon_sec = eps_sec;
    const auto records = ctrg::simulate(dev, cfg);

    ctrg::CertifyOptions opt;
    opt.method = ctrg::bound_method_from_string(method);
    opt.level = level;
    if (opt.method == ctrg::BoundMethod::Analytic && zero_curve == "sdp") {
        opt.zero_curve_closed_form = false;
        opt.zero_curve = [level](double s) { return zero_curve_value("sdp", level, s); };
    }
    const auto cert = ctrg::certify(records, chi, cfg, opt);

    write_file(out_dir + "/certificate.json", cert.to_json());
    {
        std::ofstream os(out_dir + "/bits.bin", std::ios::binary);
        if (!os) throw std::runtime_error("cannot write bits.bin");
        os.write(reinterpret_cast<const char*>(cert.output_bits.data()),
                 static_cast<std::streamsize>(cert.output_bits.size()));
    }
    {
        ctrg::BitString bits;
        bits.size = cert.output_length;
        bits.bytes = cert.output_bits;
        write_file(out_dir + "/bits.hex", bits.to_hex() + "\n");
    }
    if (save_records) write_file(out_dir + "/records.csv", ctrg::records_to_csv(records));

    std::cout << "I_hat = " << fmt10(cert.I_hat) << ", I_adj = " << fmt10(cert.I_adj)
              << ", P* = " << fmt10(cert.p_star) << ", bits = " << cert.output_length << "\n";
    return 0;
}

int cmd_regions(const std::string& chi_list_csv, int steps, const std::string& level,
                const std::string& out) {
    ConfigEcho echo("regions");
    echo.set("chi_list", chi_list_csv);
    echo.set("steps", steps);
    echo.set("level", level);
    if (!out.empty()) echo.set("out", out);
    echo.print();

    std::vector<double> chis;
    {
        std::stringstream ss(chi_list_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) chis.push_back(std::stod(tok));
    }
    for (const double c : chis)
        if (c < 0.0 || c > 1.0) throw std::invalid_argument("regions: chi outside [0,1]");
    if (steps < 2) throw std::invalid_argument("regions: need at least 2 mixture steps");

    ctrg::SdpBoundOptions opt;
    opt.level = ctrg::MonomialSet::level(level);

    std::vector<double> maxbell(chis.size());
    parallel_for(static_cast<int>(chis.size()),
                 [&](int i) { maxbell[i] = ctrg::max_bell_sdp(chis[i], opt).value; });

    // Mixtures v * PR + (1-v) * uniform: a one-parameter stand-in for the
    // polytope slice.
    const auto pr = ctrg::pr_box();
    const auto uni = ctrg::uniform_box();
    struct MixRow {
        double v = 0.0, lower = 0.0, upper = 0.0;
    };
    std::vector<MixRow> mix(steps);
    parallel_for(steps, [&](int i) {
        const double v = static_cast<double>(i) / (steps - 1);
        const auto beh = ctrg::mix(pr, uni, v);
        const auto r = ctrg::min_chi_sdp(beh, opt);
        mix[i] = {v, r.certified_lower, r.feasible_upper};
    });

    std::ostringstream os;
    os << "kind,param,value,extra\n";
    for (size_t i = 0; i < chis.size(); ++i)
        os << "maxbell," << fmt10(chis[i]) << ',' << fmt10(maxbell[i]) << ",\n";
    for (const auto& row : mix)
        os << "minchi," << fmt10(row.v) << ',' << fmt10(row.lower) << ',' << fmt10(row.upper)
           << '\n';
    if (out.empty())
        std::cout << os.str();
    else
        write_file(out, os.str());
    return 0;
}

int cmd_solve_json(const std::string& problem_path, const std::string& report_path) {
    ConfigEcho echo("solve-json");
    echo.set("problem", problem_path);
    if (!report_path.empty()) echo.set("report", report_path);
    echo.print();

    const auto imported = ctrg::import_problem_json(read_file(problem_path));
    const auto rep = ctrg::solve(imported.conic);
    const auto check = ctrg::validate_certificate(imported.conic, rep);
    std::cout << "status = " << ctrg::to_string(rep.status)
              << ", certified_bound = " << fmt10(rep.certified_bound)
              << ", revalidated = " << (check.valid ? "yes" : "no") << "\n";
    if (!report_path.empty()) write_file(report_path, rep.to_json());
    return rep.has_certificate ? 0 : kExitNumerical;
}

// Merge a JSON config file into the token stream. File values come first so
// explicit flags override them; unknown keys are rejected.
std::vector<std::string> merge_config(const std::vector<std::string>& args, CLI::App& app) {
    std::string config_path;
    for (size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") config_path = args[i + 1];
    if (config_path.empty()) return args;
    if (args.empty() || args[0].rfind("--", 0) == 0)
        throw std::invalid_argument("--config requires a leading subcommand");

    const auto j = json::parse(read_file(config_path));
    if (!j.is_object()) throw std::invalid_argument("config file must be a JSON object");

    CLI::App* sub = app.get_subcommand(args[0]);
    std::vector<std::string> merged;
    merged.push_back(args[0]);
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string flag = "--" + it.key();
        bool known = false;
        for (const auto* o : sub->get_options())
            if (o->check_name(flag)) known = true;
        if (!known)
            throw std::invalid_argument("config file: unknown key \"" + it.key() + "\"");
        // Explicit flags override the file value.
        bool overridden = false;
        for (const auto& a : args)
            if (a == flag) overridden = true;
        if (overridden) continue;
        if (it.value().is_boolean()) {
            if (it.value().get<bool>()) merged.push_back(flag);
        } else if (it.value().is_string()) {
            merged.push_back(flag);
            merged.push_back(it.value().get<std::string>());
        } else {
            merged.push_back(flag);
            merged.push_back(it.value().dump());
        }
    }
    for (size_t i = 1; i < args.size(); ++i) merged.push_back(args[i]);
    return merged;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Randomness certification for Bell experiments with bounded cross-talk"};
    app.require_subcommand(1);

    // bound
    double b_I = 2.5, b_chi = 0.0, b_delta = 0.0;
    std::string b_method = "sdp", b_level = "l1xy", b_zero = "sdp", b_export;
    bool b_geq = false;
    auto* bound = app.add_subcommand("bound", "Guessing-probability bound at one point");
    bound->add_option("--config", "JSON config file; flags override its values");
    bound->add_option("--I", b_I, "Bell value")->required();
    bound->add_option("--chi", b_chi, "cross-talk budget");
    auto* b_delta_opt = bound->add_option("--delta", b_delta, "signaling budget");
    bound->add_option("--method", b_method, "analytic | lp | sdp");
    bound->add_option("--level", b_level, "relaxation level (l1, l1xy, l1xyzw, l2r, l2)");
    bound->add_option("--zero-curve", b_zero,
                      "chi=0 curve for the shifted bound: closed-form | sdp");
    bound->add_flag("--bell-geq", b_geq, "treat the Bell constraint as >= I");
    bound->add_option("--export-problem", b_export, "dump the relaxation as JSON");

    // curve
    double c_chi = 0.01, c_imin = 2.0, c_imax = ctrg::kChshTsirelson;
    int c_steps = 20;
    std::string c_methods = "zero,sdp,shifted", c_level = "l1xy", c_out;
    auto* curve = app.add_subcommand("curve", "Bound curves over a Bell-value range");
    curve->add_option("--config", "JSON config file; flags override its values");
    curve->add_option("--chi", c_chi, "cross-talk budget");
    curve->add_option("--I-min", c_imin, "range start");
    curve->add_option("--I-max", c_imax, "range end");
    curve->add_option("--steps", c_steps, "grid points");
    curve->add_option("--methods", c_methods, "comma list of zero,sdp,shifted");
    curve->add_option("--level", c_level, "relaxation level");
    curve->add_option("--out", c_out, "output CSV path (stdout when empty)");

    // chi
    std::string x_behavior, x_model, x_level = "l2r";
    double x_eps = 0.03, x_pA = 0.0059, x_pB = 0.0031;
    bool x_skip_di = false;
    auto* chi = app.add_subcommand("chi", "Cross-talk estimates");
    chi->add_option("--config", "JSON config file; flags override its values");
    chi->add_option("--behavior", x_behavior, "behavior file (.json or .csv)");
    chi->add_option("--model", x_model, "ion | josephson");
    chi->add_option("--epsilon", x_eps, "ion leakage ratio");
    chi->add_option("--pA", x_pA, "josephson tunneling-flip probability A->B");
    chi->add_option("--pB", x_pB, "josephson tunneling-flip probability B->A");
    chi->add_option("--level", x_level, "relaxation level for the DI estimate");
    chi->add_flag("--skip-di", x_skip_di, "skip the SDP lower bound");

    // certify
    std::string f_model = "ideal", f_method = "analytic", f_level = "l1xy",
                f_zero = "closed-form", f_out = ".";
    double f_eps = 0.0, f_pA = 0.0, f_pB = 0.0, f_chi = 0.0, f_eps_sec = 1e-6;
    std::uint64_t f_n = 100000, f_seed = 1;
    bool f_save_records = false;
    auto* certify = app.add_subcommand("certify", "Simulate, estimate, bound, extract");
    certify->add_option("--config", "JSON config file; flags override its values");
    certify->add_option("--model", f_model, "ideal | ion | josephson | deterministic");
    certify->add_option("--epsilon", f_eps, "ion leakage ratio");
    certify->add_option("--pA", f_pA, "josephson parameter");
    certify->add_option("--pB", f_pB, "josephson parameter");
    certify->add_option("--n", f_n, "number of rounds");
    certify->add_option("--seed", f_seed, "RNG seed");
    certify->add_option("--chi", f_chi, "trusted cross-talk budget");
    certify->add_option("--method", f_method, "analytic | lp | sdp");
    certify->add_option("--level", f_level, "relaxation level");
    certify->add_option("--zero-curve", f_zero, "closed-form | sdp");
    certify->add_option("--eps-sec", f_eps_sec, "security parameter");
    certify->add_option("--out-dir", f_out, "output directory");
    certify->add_flag("--save-records", f_save_records, "also write records.csv");

    // regions
    std::string r_chis = "0,0.01,1", r_level = "l1xy", r_out;
    int r_steps = 5;
    auto* regions = app.add_subcommand(
        "regions", "Boundary data: max CHSH per chi and min-chi along the PR-uniform mixture");
    regions->add_option("--config", "JSON config file; flags override its values");
    regions->add_option("--chi-list", r_chis, "comma list of chi values");
    regions->add_option("--steps", r_steps, "mixture grid points");
    regions->add_option("--level", r_level, "relaxation level");
    regions->add_option("--out", r_out, "output CSV path (stdout when empty)");

    // solve-json
    std::string s_problem, s_report;
    auto* solvej = app.add_subcommand("solve-json", "Solve an exported relaxation dump");
    solvej->add_option("--config", "JSON config file; flags override its values");
    solvej->add_option("--problem", s_problem, "problem JSON path")->required();
    solvej->add_option("--report", s_report, "write the solve report JSON here");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = merge_config(args, app);
        std::vector<const char*> cargv;
        cargv.push_back(argv[0]);
        for (const auto& a : args) cargv.push_back(a.c_str());
        app.parse(static_cast<int>(cargv.size()), const_cast<char**>(cargv.data()));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (bound->parsed())
            return cmd_bound(b_I, b_chi, b_delta, b_delta_opt->count() > 0, b_method, b_level,
                             b_zero, b_geq, b_export);
        if (curve->parsed())
            return cmd_curve(c_chi, c_imin, c_imax, c_steps, c_methods, c_level, c_out);
        if (chi->parsed())
            return cmd_chi(x_behavior, x_model, x_eps, x_pA, x_pB, x_level, x_skip_di);
        if (certify->parsed())
            return cmd_certify(f_model, f_eps, f_pA, f_pB, f_n, f_seed, f_chi, f_method,
                               f_level, f_zero, f_eps_sec, f_out, f_save_records);
        if (regions->parsed()) return cmd_regions(r_chis, r_steps, r_level, r_out);
        if (solvej->parsed()) return cmd_solve_json(s_problem, s_report);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
