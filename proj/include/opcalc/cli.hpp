#pragma once

// Command dispatch for the opcalc executable. run_command never exits the
// process; it returns the exit code and writes to the given streams.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "corpus.hpp"
#include "report.hpp"
#include "spec_format.hpp"
#include "verify.hpp"

namespace opcalc::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failed = 2;
inline constexpr int exit_inconclusive = 3;
inline constexpr int exit_usage = 64;

/// 0 for an accepted outcome, 2 for failed or a status other than the
/// expected one, 3 for inconclusive.
inline int exit_code(Status status, std::optional<Status> expected = std::nullopt) {
    if (status == Status::inconclusive) return exit_inconclusive;
    if (status == Status::failed) return exit_failed;
    if (expected && status != *expected) return exit_failed;
    return exit_ok;
}

/// Worst code over a set: 2 dominates 3 dominates 0.
inline int combine(int a, int b) {
    if (a == exit_failed || b == exit_failed) return exit_failed;
    if (a == exit_inconclusive || b == exit_inconclusive) return exit_inconclusive;
    return std::max(a, b);
}

namespace detail {

struct UsageError : Error {
    using Error::Error;
};

inline std::pair<std::string, double> key_value(const std::string& kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("expected key=value, got '" + kv + "'");
    std::string key = spec::detail::trim(std::string_view(kv).substr(0, eq));
    std::string val = kv.substr(eq + 1);
    try {
        double v = spec::evaluate(*spec::parse_expression(val, 1, static_cast<int>(eq) + 2));
        if (!std::isfinite(v)) throw UsageError("parameter '" + key + "' is not finite");
        return {key, v};
    } catch (const SyntaxError& e) {
        throw UsageError("parameter '" + key + "': " + e.what());
    }
}

inline std::string render(const report::Json& j, const std::string& format, bool color) {
    return format == "text" ? report::to_text(j, color) : report::dump(j);
}

inline void append_mc(FixtureOutcome& out, std::size_t samples, std::uint64_t seed) {
    if (!out.report) return;
    auto mc = triple_nu_mc(out.params.at("nu"), out.params.at("p"), samples, seed);
    std::string line = "3D Monte Carlo: " + format_double(mc.value.real()) + " +- " +
                       format_double(mc.standard_error) + " (" + std::to_string(samples) + " samples, seed " +
                       std::to_string(seed) + ")";
    if (out.report->closed_form)
        line += ", relative difference to the closed form " +
                format_double(std::abs(mc.value.real() / out.report->closed_form->real() - 1.0));
    out.report->diagnostics.push_back(line);
}

struct Globals {
    std::uint64_t seed = 1;
    std::size_t mc_samples = 0;
    bool color = false;
};

// ------------------------------------------------------------- commands

inline int cmd_run(const std::string& path, const std::string& format, bool timing, std::ostream& out,
                   std::ostream& err, const Globals& g) {
    spec::SpecDocument doc;
    IdentitySpec s;
    try {
        doc = spec::parse_document(spec::read_file(path));
        s = spec::to_identity(doc);
    } catch (const Error& e) {
        err << path << ": " << e.what() << "\n";
        return exit_usage;
    }
    VerificationReport rep;
    try {
        rep = verify_identity(s);
    } catch (const Error& e) {
        err << path << ": verification error: " << e.what() << "\n";
        return exit_failed;
    }
    if (g.mc_samples > 0) err << "note: --mc-samples applies to the triple-nu corpus fixture\n";
    out << render(report::to_json(rep, {timing}), format, g.color);
    return exit_code(rep.status, doc.expect);
}

inline int cmd_corpus(const std::vector<std::string>& only, const std::vector<std::string>& params,
                      const std::string& format, bool timing, bool sequential, std::ostream& out, std::ostream& err,
                      const Globals& g) {
    std::vector<std::string> ids = only.empty() ? list_fixtures() : only;
    std::vector<CorpusRequest> requests;
    try {
        for (const auto& id : ids) find_fixture(id);
        std::vector<std::pair<std::string, std::pair<std::string, double>>> parsed;
        for (const auto& p : params) {
            auto [key, v] = key_value(p);
            // "id.key=v" targets one fixture; a bare key targets every selected fixture.
            std::string target;
            if (auto dot = key.find('.'); dot != std::string::npos) {
                target = key.substr(0, dot);
                key = key.substr(dot + 1);
                if (std::find(ids.begin(), ids.end(), target) == ids.end())
                    throw UsageError("--params targets '" + target + "', which is not selected");
            }
            parsed.push_back({target, {key, v}});
        }
        for (const auto& id : ids) {
            CorpusRequest rq{id, {}};
            for (const auto& [target, kv] : parsed) {
                if (!target.empty() && target != id) continue;
                if (!find_fixture(id).defaults.count(kv.first))
                    throw UsageError("fixture '" + id + "' has no parameter '" + kv.first + "'");
                rq.params[kv.first] = kv.second;
            }
            fixture_spec(id, rq.params);  // surfaces ParamError before any work starts
            requests.push_back(std::move(rq));
        }
    } catch (const Error& e) {
        err << "corpus: " << e.what() << "\n";
        return exit_usage;
    }

    auto outcomes = run_corpus(requests, !sequential);
    if (g.mc_samples > 0) {
        for (auto& o : outcomes) {
            if (o.id != "triple-nu") continue;
            try {
                append_mc(o, g.mc_samples, g.seed);
            } catch (const Error& e) {
                o.report->diagnostics.push_back(std::string("3D Monte Carlo failed: ") + e.what());
            }
        }
    }
    int code = exit_ok;
    for (const auto& o : outcomes) {
        if (!o.report) code = combine(code, exit_failed);
        else code = combine(code, exit_code(o.report->status, o.expected));
    }
    out << render(report::corpus_json(outcomes, {timing}), format, g.color);
    return code;
}

inline int cmd_quad(const std::string& entry, const std::vector<std::string>& kvs, std::vector<double> at, double tol,
                    const std::string& format, std::ostream& out, std::ostream& err) {
    TransformEntry e;
    try {
        Params p;
        for (const auto& kv : kvs) p.insert(key_value(kv));
        e = catalog_lookup(entry, p);
        if (at.empty()) at.assign(static_cast<std::size_t>(e.dimension), 1.0);
        if (static_cast<int>(at.size()) != e.dimension)
            throw UsageError("--at needs " + std::to_string(e.dimension) + " value(s)");
        for (double v : at)
            if (!(v > 0.0)) throw UsageError("--at values must be positive");
        if (!e.h) throw UsageError("entry '" + entry + "' has no integrand h");
    } catch (const Error& ex) {
        err << "quad: " << ex.what() << "\n";
        return exit_usage;
    }

    report::Json j;
    j["entry"] = entry;
    j["params"] = e.params;
    j["at"] = at;
    int code = exit_ok;
    try {
        const bool cosine = e.kind == TransformKind::cosine;
        auto hints = e.hints;
        hints.resize(static_cast<std::size_t>(e.dimension));
        for (std::size_t i = 0; i < hints.size(); ++i) {
            if (cosine) hints[i].phase_scale = at[i];
            else hints[i].decay_scale = 1.0 / at[i];
        }
        auto kernel = [&](std::span<const double> x) -> cplx {
            double w = 1.0;
            for (std::size_t i = 0; i < x.size(); ++i) w *= cosine ? std::cos(at[i] * x[i]) : std::exp(-at[i] * x[i]);
            return w == 0.0 ? cplx{} : e.h(x) * w;
        };
        quad::QuadratureResult q = e.dimension == 1
                                       ? quad::integrate_halfline(
                                             [&](double x) {
                                                 double v[1] = {x};
                                                 return kernel(v);
                                             },
                                             tol, hints[0])
                                       : quad::integrate_box(kernel, e.dimension, tol, hints);
        j["quadrature"] = report::Json{{"value", report::detail::value(q.value)},
                                       {"error", report::detail::number(q.error)},
                                       {"evals", q.evaluations},
                                       {"converged", q.converged},
                                       {"method", q.method}};
        if (!q.converged) code = exit_inconclusive;
        if (e.H_closed) {
            cplx c = e.H_closed(at);
            j["closed_form"] = report::detail::value(c);
            double rel = relative_discrepancy(q.value, c);
            j["rel_disc"] = report::detail::number(rel);
            if (q.converged && rel > std::max(1e-6, 10.0 * tol)) code = exit_failed;
        }
        if (e.H) {
            auto s = evaluate_series(*e.H, at);
            j["series"] = report::Json{{"value", report::detail::value(s.value)},
                                       {"classification", std::string(to_string(s.classification))},
                                       {"terms_used", s.terms_used}};
        }
    } catch (const Error& ex) {
        err << "quad: " << ex.what() << "\n";
        return exit_failed;
    }
    if (format == "text") {
        out << entry << " at (" << spec::detail::joined([&] {
            std::vector<std::string> s;
            for (double v : at) s.push_back(format_double(v));
            return s;
        }()) << ")\n";
        for (const char* k : {"quadrature", "series"})
            if (j.contains(k)) out << "  " << k << "  " << report::detail::text_value(j[k]["value"]) << "\n";
        if (j.contains("closed_form"))
            out << "  closed_form  " << report::detail::text_value(j["closed_form"]) << "  (rel_disc "
                << report::detail::text_value(j["rel_disc"]) << ")\n";
    } else {
        out << report::dump(j);
    }
    return code;
}

inline int cmd_specfun(const std::string& name, const std::vector<std::string>& raw, std::ostream& out,
                       std::ostream& err) {
    std::vector<double> args;
    try {
        for (const auto& a : raw) args.push_back(spec::evaluate(*spec::parse_expression(a, 1, 1)));
    } catch (const Error& e) {
        err << "specfun-eval: bad argument: " << e.what() << "\n";
        return exit_usage;
    }
    auto info = std::find_if(specfun::function_table.begin(), specfun::function_table.end(),
                             [&](const auto& f) { return f.name == name; });
    if (info == specfun::function_table.end()) {
        err << "specfun-eval: unknown function '" << name << "'; expected one of";
        for (const auto& f : specfun::function_table) err << " " << f.name;
        err << "\n";
        return exit_usage;
    }
    if (static_cast<int>(args.size()) != info->arity) {
        err << "specfun-eval: " << name << " takes " << info->arity << " argument(s) (" << info->domain << ")\n";
        return exit_usage;
    }
    try {
        out << format_double(specfun::evaluate(name, args)) << "\n";
    } catch (const Error& e) {
        err << "specfun-eval: " << e.what() << "\n";
        return exit_failed;
    }
    return exit_ok;
}

/// Re-renders a saved report; the exit code follows the statuses it records.
inline int cmd_report(const std::string& path, const std::string& format, std::ostream& out, std::ostream& err,
                      const Globals& g) {
    report::Json j;
    try {
        std::string text = path == "-" ? std::string(std::istreambuf_iterator<char>(std::cin), {})
                                       : spec::read_file(path);
        j = report::Json::parse(text);
        auto check = [](const report::Json& r) {
            if (!r.is_object() || !r.contains("id") || !r.contains("status"))
                throw UsageError("not a verification report (needs id and status)");
            if (!r.contains("error") && (!r.contains("lhs") || !r.contains("rhs")))
                throw UsageError("report '" + r["id"].get<std::string>() + "' lacks lhs or rhs");
        };
        if (j.contains("reports")) {
            for (const auto& r : j["reports"]) check(r);
            if (!j.contains("summary")) throw UsageError("corpus report lacks a summary");
        } else {
            check(j);
        }
    } catch (const std::exception& e) {
        err << "report: " << e.what() << "\n";
        return exit_usage;
    }

    auto one = [](const report::Json& r) {
        if (r.contains("error")) return exit_failed;
        auto s = parse_status(r["status"].get<std::string>());
        if (!s) return exit_failed;
        std::optional<Status> expected;
        if (r.contains("expected")) expected = parse_status(r["expected"].get<std::string>());
        return exit_code(*s, expected);
    };
    int code = exit_ok;
    if (j.contains("reports"))
        for (const auto& r : j["reports"]) code = combine(code, one(r));
    else
        code = one(j);
    out << render(j, format, g.color);
    return code;
}

}  // namespace detail

/// Parses argv-style arguments (without the program name) and runs one subcommand.
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                       bool color = false) {
    CLI::App app{"Operator-calculus identity verifier", "opcalc"};
    app.require_subcommand(1);
    detail::Globals g;
    g.color = color;
    app.add_option("--seed", g.seed, "Seed for the 3D Monte Carlo cross-check")->capture_default_str();
    app.add_option("--mc-samples", g.mc_samples, "Samples for the triple-nu 3D Monte Carlo cross-check (0 = off)")
        ->capture_default_str();

    std::string format = "json";
    bool no_timing = false;
    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
    };

    std::string spec_path;
    auto* run = app.add_subcommand("run", "Verify one identity described by a spec file");
    run->add_option("spec", spec_path, "Spec file")->required();
    add_format(run);
    run->add_flag("--no-timing", no_timing, "Leave wall_ms out of the report (byte-stable output)");

    std::vector<std::string> only, params;
    bool sequential = false, list = false;
    auto* corpus = app.add_subcommand("corpus", "Run the built-in fixtures");
    corpus->add_option("--only", only, "Fixture ids to run (default: all)");
    corpus->add_option("--params", params, "Parameter overrides k=v, or id.k=v for one fixture");
    corpus->add_flag("--sequential", sequential, "Run fixtures one after another");
    corpus->add_flag("--list", list, "List fixture ids and exit");
    add_format(corpus);
    corpus->add_flag("--no-timing", no_timing, "Leave wall_ms out of the reports (byte-stable output)");

    std::string entry;
    std::vector<std::string> entry_params;
    std::vector<double> at;
    double tol = 1e-10;
    auto* quadc = app.add_subcommand("quad", "Laplace (or cosine) transform of a catalog integrand by quadrature");
    quadc->add_option("entry", entry, "Catalog entry name")->required();
    quadc->add_option("params", entry_params, "Entry parameters k=v");
    quadc->add_option("--at", at, "Transform variable per axis (default 1)")->delimiter(',');
    quadc->add_option("--tol", tol, "Quadrature tolerance")->capture_default_str();
    add_format(quadc);

    std::string fn;
    std::vector<std::string> fn_args;
    auto* sf = app.add_subcommand("specfun-eval", "Evaluate a special function");
    sf->add_option("function", fn, "Function name")->required();
    sf->add_option("args", fn_args, "Arguments")->allow_extra_args();

    std::string report_path;
    auto* rep = app.add_subcommand("report", "Re-render a saved JSON report");
    rep->add_option("file", report_path, "Report file ('-' for stdin)")->required();
    add_format(rep);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    if (run->parsed()) return detail::cmd_run(spec_path, format, !no_timing, out, err, g);
    if (corpus->parsed()) {
        if (list) {
            for (const auto& f : fixtures()) out << f.id << "  " << f.description << "\n";
            return exit_ok;
        }
        return detail::cmd_corpus(only, params, format, !no_timing, sequential, out, err, g);
    }
    if (quadc->parsed()) return detail::cmd_quad(entry, entry_params, at, tol, format, out, err);
    if (sf->parsed()) return detail::cmd_specfun(fn, fn_args, out, err);
    return detail::cmd_report(report_path, format, out, err, g);
}

inline int run_command(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    const bool color = std::getenv("NO_COLOR") == nullptr && ::isatty(STDOUT_FILENO) == 1;
    return run_command(args, std::cout, std::cerr, color);
}

}  // namespace opcalc::cli
