#pragma once

// The gevrey-lab commands as functions returning exit code and output, so
// they can be driven both from main() and from tests.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "glab/cli/pipeline.hpp"
#include "glab/cli/registry.hpp"

namespace glab::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 2, kInputError = 3, kSolverError = 4 };

struct CommandResult {
    int exit_code = kOk;
    std::string out;
    std::string err;
};

inline std::string read_file(const std::filesystem::path &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DomainError("cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// Runs `body`, mapping library errors onto exit codes.
template <class Fn> CommandResult guarded(Fn &&body) {
    CommandResult r;
    try {
        body(r);
    } catch (const ParseError &e) {
        r.exit_code = kInputError;
        r.err += "error[" + e.code() + "] " + e.what() + "\n";
    } catch (const SemanticError &e) {
        r.exit_code = kInputError;
        r.err += "error[" + e.code() + "] " + e.what() + "\n";
    } catch (const RegressionMismatch &e) {
        r.exit_code = kCheckFailed;
        r.err += "error[" + e.code() + "] " + e.what() + "\n";
    } catch (const Error &e) {
        r.exit_code = kSolverError;
        r.err += "error[" + e.code() + "] " + e.what() + "\n";
    } catch (const std::exception &e) {
        r.exit_code = kSolverError;
        r.err += std::string("error[internal] ") + e.what() + "\n";
    }
    return r;
}

inline CommandResult cmd_check(const std::string &text) {
    return guarded([&](CommandResult &r) {
        const ProblemDocument doc = parse_problem(text);
        const CheckResult c = run_check(doc.spec);
        for (const auto &l : c.lines) r.out += l + "\n";
        r.exit_code = c.route == Route::Neither ? kCheckFailed : kOk;
    });
}

inline CommandResult cmd_solve(const std::string &text, const Options &flags, const std::filesystem::path &out_dir) {
    return guarded([&](CommandResult &r) {
        const ProblemDocument doc = parse_problem(text);
        const CheckResult c = run_check(doc.spec);
        r.out += "route: " + route_name(c.route) + "\n";
        if (c.route == Route::Neither) {
            for (const auto &l : c.lines) r.err += l + "\n";
            r.err += "error[check_failed] no existence result applies; nothing solved\n";
            r.exit_code = kCheckFailed;
            return;
        }
        const Settings s = resolve_settings(doc.spec, doc.options, flags);
        const SolveResult sol = run_solve(doc.spec, c.route, s);
        for (const auto &f : write_outputs(sol, out_dir)) r.out += "wrote " + f.filename().string() + "\n";
        r.out += "residual vanishes to degree " + std::to_string(sol.residual_degree) + "\n";
        if (sol.agree_degree)
            r.out += "expansion agrees with the direct solution to degree " + std::to_string(*sol.agree_degree) + "\n";
    });
}

inline std::string estimate_text(const gevrey::GevreyEstimate &e) {
    std::ostringstream os;
    os.precision(6);
    os << "fitted order " << std::fixed << e.fitted_order << " (window n = " << e.window.first << ".."
       << e.window.second << ", rho = " << to_string(e.rho) << ")\n";
    return os.str();
}

inline CommandResult cmd_estimate(const std::string &text, const Options &flags, bool json) {
    return guarded([&](CommandResult &r) {
        const ProblemDocument doc = parse_problem(text);
        const CheckResult c = run_check(doc.spec);
        if (c.route == Route::Neither) {
            r.err += "error[check_failed] no existence result applies; no norms to estimate\n";
            r.exit_code = kCheckFailed;
            return;
        }
        const Settings s = resolve_settings(doc.spec, doc.options, flags);
        const SolveResult sol = run_solve(doc.spec, c.route, s);
        const auto est = gevrey::estimate_order(norm_pairs(sol.norms), s.window, s.rho);
        const Rational theory = c.predicted ? c.predicted->order : Rational(0);
        if (json) {
            r.out = nlohmann::json(est).dump() + "\n";
            return;
        }
        std::ostringstream os;
        os.precision(6);
        os << estimate_text(est);
        os << "theoretical order " << to_string(theory) << "\n";
        os << "difference " << std::fixed << est.fitted_order - to_double(theory) << "\n";
        r.out = os.str();
    });
}

inline CommandResult cmd_estimate_csv(const std::string &csv, double window, const Rational &rho, bool json) {
    return guarded([&](CommandResult &r) {
        const auto rows = parse_norms_csv(csv);
        const auto est = gevrey::estimate_order(norm_pairs(rows), window, rho);
        r.out = json ? nlohmann::json(est).dump() + "\n" : estimate_text(est);
    });
}

inline CommandResult cmd_examples_list() {
    CommandResult r;
    for (const auto &ex : registry()) {
        std::string params;
        for (const auto &[k, v] : ex.params) params += " " + k + "=" + v;
        r.out += ex.name + params + "  " + ex.summary + "\n";
    }
    return r;
}

/// `run all` runs the default registry concurrently.
inline CommandResult cmd_examples_run(const std::string &name, const Params &params) {
    return guarded([&](CommandResult &r) {
        std::vector<Example> entries;
        auto usage = [&](const std::string &what) {
            r.exit_code = kInputError;
            r.err += "error[usage] " + what + "\n";
        };
        if (name == "all") {
            if (!params.empty()) return usage("'all' takes no parameters");
            entries = registry();
        } else {
            try {
                entries.push_back(make_example(name, params));
            } catch (const DomainError &e) {
                return usage(e.what());
            }
        }
        bool all_pass = true;
        const auto reports = run_examples(entries);
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto &rep = reports[i];
            std::string head = rep.name;
            for (const auto &[k, v] : entries[i].params) head += " " + k + "=" + v;
            r.out += (rep.pass ? "PASS " : "FAIL ") + head + "\n";
            for (const auto &l : rep.lines) r.out += "  " + l + "\n";
            if (!rep.pass) {
                r.err += "error[regression_mismatch] " + rep.failure + "\n";
                all_pass = false;
            }
        }
        r.exit_code = all_pass ? kOk : kCheckFailed;
    });
}

} // namespace glab::cli
