#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "ben/cli.hpp"

namespace ben::cli {
namespace {

using Json = nlohmann::ordered_json;

std::string format_number(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit(std::ostream& out, const Json& v, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (v.type()) {
        case Json::value_t::object: {
            if (v.empty()) {
                out << "{}";
                return;
            }
            out << '{' << nl;
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out << ',' << nl;
                first = false;
                out << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
                emit(out, it.value(), indent, depth + 1);
            }
            out << nl << close_pad << '}';
            return;
        }
        case Json::value_t::array: {
            if (v.empty()) {
                out << "[]";
                return;
            }
            out << '[' << nl;
            bool first = true;
            for (const auto& item : v) {
                if (!first) out << ',' << nl;
                first = false;
                out << pad;
                emit(out, item, indent, depth + 1);
            }
            out << nl << close_pad << ']';
            return;
        }
        case Json::value_t::number_float:
            out << format_number(v.get<double>());
            return;
        default:
            out << v.dump();
    }
}

Json constants_json(const models::HypothesisConstants& c) {
    Json j;
    j["c0"] = c.c0;
    j["g"] = c.g;
    j["mu"] = c.mu;
    j["g_hat"] = c.g_hat;
    j["mu_hat"] = c.mu_hat;
    j["c_tilde"] = c.c_tilde;
    j["mu_bar"] = c.mu_bar;
    return j;
}

}  // namespace

Json to_json(const energy::EnergyReport& r) {
    Json j;
    j["total"] = r.total;
    j["term_psi"] = r.term_psi;
    j["term_conj"] = r.term_conj;
    j["term_pair"] = r.term_pair;
    j["residual_norm"] = r.residual_norm;
    j["defect_norm"] = r.defect_norm;
    j["normalized"] = r.normalized;
    j["scale"] = r.scale;
    return j;
}

Json to_json(const models::ConditionReport& r) {
    Json j;
    j["condition_name"] = models::condition_name(r.condition);
    j["samples"] = r.samples;
    j["worst_margin"] = r.worst_margin;
    j["verdict"] = r.pass ? "pass" : "fail";
    j["constants"] = constants_json(r.constants);
    Json witnesses = Json::array();
    for (const auto& w : r.witnesses) {
        Json item;
        item["margin"] = w.margin;
        item["t"] = w.t;
        item["x"] = w.x;
        item["h"] = w.h;
        witnesses.push_back(std::move(item));
    }
    j["witnesses"] = std::move(witnesses);
    return j;
}

void write_json(std::ostream& out, const Json& value, int indent) {
    emit(out, value, indent, 0);
    out << '\n';
}

}  // namespace ben::cli
