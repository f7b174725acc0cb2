// gevrey-lab {check|solve|estimate|examples} [file] [flags]

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "glab/cli/commands.hpp"

namespace {

using namespace glab;
using namespace glab::cli;

int emit(const CommandResult &r) {
    std::cout << r.out;
    std::cerr << r.err;
    return r.exit_code;
}

std::optional<Rational> rational_flag(const std::string &text, const char *name) {
    if (text.empty()) return std::nullopt;
    auto q = parse_rational(text);
    if (!q) throw SemanticError(0, 0, std::string("--") + name + " expects a rational, got '" + text + "'");
    return q;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Formal power series solutions of singular PDE systems and their Gevrey orders"};
    app.require_subcommand(1);

    std::string file, out_dir = ".", rho_text, window_text, norms_file;
    int degree = -1, order = -1;
    bool json = false;

    auto add_numeric = [&](CLI::App *c) {
        c->add_option("--degree", degree, "x-truncation degree D");
        c->add_option("--order", order, "expansion order N");
        c->add_option("--rho", rho_text, "norm radius (rational)");
    };

    auto *check = app.add_subcommand("check", "report which existence result applies");
    check->add_option("file", file, "problem file")->required();

    auto *solve = app.add_subcommand("solve", "solve and write solution.json, solution_x.json, norms.csv");
    solve->add_option("file", file, "problem file")->required();
    add_numeric(solve);
    solve->add_option("--out-dir", out_dir, "output directory");

    auto *estimate = app.add_subcommand("estimate", "fit the Gevrey order of the coefficient norms");
    estimate->add_option("file", file, "problem file");
    estimate->add_option("--norms", norms_file, "norms.csv to fit instead of solving");
    add_numeric(estimate);
    estimate->add_option("--window", window_text, "estimation window fraction (rational)");
    estimate->add_flag("--json", json, "print the estimate as JSON");

    auto *examples = app.add_subcommand("examples", "list or run the worked examples");
    examples->require_subcommand(1);
    examples->add_subcommand("list", "list registry entries");
    auto *run = examples->add_subcommand("run", "run an entry (or 'all')");
    std::string name;
    std::vector<std::string> assignments;
    run->add_option("name", name, "entry name or 'all'")->required();
    run->add_option("params", assignments, "key=value parameters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        // --help and friends exit 0; real usage errors share the input-error code
        return app.exit(e) == 0 ? kOk : kInputError;
    }

    Options flags;
    const CommandResult bad = guarded([&](CommandResult &) {
        if (degree >= 0) flags.degree = degree;
        if (order >= 0) flags.order = order;
        flags.rho = rational_flag(rho_text, "rho");
        flags.window = rational_flag(window_text, "window");
    });
    if (bad.exit_code != kOk) return emit(bad);

    auto load = [&](const std::string &path, CommandResult &r) -> std::optional<std::string> {
        try {
            return read_file(path);
        } catch (const Error &e) {
            r.exit_code = kInputError;
            r.err = "error[io] " + std::string(e.what()) + "\n";
            return std::nullopt;
        }
    };

    CommandResult r;
    if (check->parsed()) {
        if (auto text = load(file, r)) r = cmd_check(*text);
    } else if (solve->parsed()) {
        if (auto text = load(file, r)) r = cmd_solve(*text, flags, out_dir);
    } else if (estimate->parsed()) {
        if (!norms_file.empty()) {
            if (auto text = load(norms_file, r))
                r = cmd_estimate_csv(*text, flags.window ? to_double(*flags.window) : 0.5,
                                     flags.rho ? *flags.rho : Rational(1, 2), json);
        } else if (file.empty()) {
            r.exit_code = kInputError;
            r.err = "error[usage] estimate needs a problem file or --norms\n";
        } else if (auto text = load(file, r)) {
            r = cmd_estimate(*text, flags, json);
        }
    } else if (examples->got_subcommand("list")) {
        r = cmd_examples_list();
    } else {
        Params params;
        for (const auto &a : assignments) {
            const auto eq = a.find('=');
            if (eq == std::string::npos || eq == 0) {
                r.exit_code = kInputError;
                r.err = "error[usage] parameter '" + a + "' is not key=value\n";
                return emit(r);
            }
            params[a.substr(0, eq)] = a.substr(eq + 1);
        }
        r = cmd_examples_run(name, params);
    }
    return emit(r);
}
