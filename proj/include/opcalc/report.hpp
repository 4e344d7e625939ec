#pragma once

// JSON and text renderings of verification reports. JSON numbers carry 17
// significant digits; wall-clock time is the only run-dependent field and can
// be left out for byte-stable output.

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "corpus.hpp"
#include "verify.hpp"

namespace opcalc::report {

using Json = nlohmann::ordered_json;

struct Options {
    bool timing = true;  // include wall_ms
};

namespace detail {

/// NaN and infinities have no JSON spelling; they become null.
inline Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

/// Real values stay plain numbers; complex ones become {re, im}.
inline Json value(cplx z) {
    if (z.imag() == 0.0) return number(z.real());
    return Json{{"re", number(z.real())}, {"im", number(z.imag())}};
}

inline void write(std::ostringstream& o, const Json& j, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                o << "{}";
                return;
            }
            o << "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) o << ",\n";
                first = false;
                o << pad << Json(it.key()).dump() << ": ";
                write(o, it.value(), indent, depth + 1);
            }
            o << "\n" << close << "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                o << "[]";
                return;
            }
            o << "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) o << ",\n";
                o << pad;
                write(o, j[i], indent, depth + 1);
            }
            o << "\n" << close << "]";
            return;
        }
        case Json::value_t::number_float: o << format_double(j.get<double>()); return;
        default: o << j.dump(); return;
    }
}

}  // namespace detail

/// Pretty JSON with every float printed by %.17g.
inline std::string dump(const Json& j, int indent = 2) {
    std::ostringstream o;
    detail::write(o, j, indent, 0);
    o << "\n";
    return o.str();
}

inline Json to_json(const VerificationReport& r, const Options& opt = {}) {
    using detail::number;
    using detail::value;
    Json j;
    j["id"] = r.id;
    j["mode"] = std::string(to_string(r.mode));
    j["status"] = std::string(to_string(r.status));
    Json lhs;
    lhs["available"] = r.lhs_available;
    lhs["value"] = r.lhs_available ? value(r.lhs.value) : Json(nullptr);
    lhs["error"] = r.lhs_available ? number(r.lhs.error) : Json(nullptr);
    lhs["evals"] = r.lhs.evaluations;
    lhs["method"] = r.lhs.method;
    if (!r.lhs_note.empty()) lhs["note"] = r.lhs_note;
    j["lhs"] = lhs;
    Json rhs;
    rhs["value"] = value(r.rhs.value);
    rhs["classification"] = std::string(to_string(r.rhs.classification));
    rhs["terms_used"] = r.rhs.terms_used;
    rhs["last_term"] = number(r.rhs.last_term);
    rhs["accelerated"] = r.rhs.accelerated;
    rhs["method"] = r.rhs.method;
    j["rhs"] = rhs;
    j["closed_form"] = r.closed_form ? value(*r.closed_form) : Json(nullptr);
    j["abs_disc"] = number(r.abs_disc);
    j["rel_disc"] = number(r.rel_disc);
    j["closed_rel_disc"] = r.closed_rel_disc ? number(*r.closed_rel_disc) : Json(nullptr);
    j["phase"] = r.phase_exponent ? number(*r.phase_exponent) : Json(nullptr);
    j["citation"] = r.citation;
    j["diagnostics"] = r.diagnostics;
    if (opt.timing) j["wall_ms"] = number(r.wall_ms);
    return j;
}

inline Json to_json(const FixtureOutcome& out, const Options& opt = {}) {
    Json j;
    if (out.report) {
        j = to_json(*out.report, opt);
    } else {
        j["id"] = out.id;
        j["status"] = "error";
        j["error"] = out.error;
    }
    Json params = Json::object();
    for (const auto& [k, v] : out.params) params[k] = detail::number(v);
    j["params"] = params;
    j["expected"] = std::string(to_string(out.expected));
    j["passed"] = out.passed();
    return j;
}

inline Json corpus_json(const std::vector<FixtureOutcome>& outcomes, const Options& opt = {}) {
    Json reports = Json::array();
    std::size_t passed = 0;
    for (const auto& o : outcomes) {
        reports.push_back(to_json(o, opt));
        if (o.passed()) ++passed;
    }
    Json j;
    j["reports"] = reports;
    j["summary"] = Json{{"total", outcomes.size()}, {"passed", passed}, {"failed", outcomes.size() - passed}};
    return j;
}

// ------------------------------------------------------------------- text

namespace detail {

inline std::string text_value(const Json& v) {
    if (v.is_null()) return "-";
    if (v.is_object()) return format_double(v["re"].get<double>()) + (v["im"].get<double>() < 0 ? " - " : " + ") +
                              format_double(std::abs(v["im"].get<double>())) + "i";
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

inline std::string paint(const std::string& s, const char* code, bool color) {
    return color ? std::string("\033[") + code + "m" + s + "\033[0m" : s;
}

inline const char* status_color(const std::string& status) {
    if (status == "verified" || status == "formal-only") return "32";
    if (status == "inconclusive") return "33";
    return "31";
}

inline void report_text(std::ostringstream& o, const Json& r, bool color) {
    const std::string status = r.value("status", std::string("?"));
    o << paint(status, status_color(status), color) << "  " << r.value("id", std::string("?"));
    if (r.contains("expected") && r["expected"] != status) o << "  (expected " << r["expected"].get<std::string>() << ")";
    o << "\n";
    if (r.contains("error")) {
        o << "  error: " << r["error"].get<std::string>() << "\n";
        return;
    }
    const auto& lhs = r["lhs"];
    const auto& rhs = r["rhs"];
    o << "  lhs     " << text_value(lhs["value"]) << "  (error " << text_value(lhs["error"]) << ", "
      << lhs["evals"].dump() << " evals)\n";
    o << "  rhs     " << text_value(rhs["value"]) << "  (" << rhs["classification"].get<std::string>() << ", "
      << rhs["terms_used"].dump() << " terms)\n";
    o << "  closed  " << text_value(r["closed_form"]) << "\n";
    o << "  rel_disc " << text_value(r["rel_disc"]);
    if (r.contains("wall_ms")) o << "  wall " << text_value(r["wall_ms"]) << " ms";
    o << "\n";
    if (!r["citation"].get<std::string>().empty()) o << "  source  " << r["citation"].get<std::string>() << "\n";
    for (const auto& d : r["diagnostics"]) o << "  note    " << d.get<std::string>() << "\n";
}

}  // namespace detail

/// Text form of a single report, or of a {reports, summary} document.
inline std::string to_text(const Json& j, bool color = false) {
    std::ostringstream o;
    if (j.contains("reports")) {
        for (const auto& r : j["reports"]) detail::report_text(o, r, color);
        const auto& s = j["summary"];
        o << s["passed"].dump() << "/" << s["total"].dump() << " fixtures passed\n";
    } else {
        detail::report_text(o, j, color);
    }
    return o.str();
}

}  // namespace opcalc::report
