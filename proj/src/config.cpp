#include "ergo/config.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ergo/combinatorics.hpp"
#include "ergo/gowers.hpp"
#include "ergo/recurrence.hpp"

namespace ergo {

using json = nlohmann::ordered_json;

const char* run_kind_name(RunKind k) {
    switch (k) {
        case RunKind::Average: return "average";
        case RunKind::Gowers: return "gowers";
        case RunKind::Scan: return "scan";
        case RunKind::Behrend: return "behrend";
        case RunKind::Counterexample: return "counterexample";
        case RunKind::Cube: return "cube";
        case RunKind::Weyl: return "weyl";
        case RunKind::Multicorrelation: return "multicorrelation";
    }
    return "unknown";
}

RunKind run_kind_from_name(const std::string& name) {
    for (RunKind k : {RunKind::Average, RunKind::Gowers, RunKind::Scan, RunKind::Behrend,
                      RunKind::Counterexample, RunKind::Cube, RunKind::Weyl,
                      RunKind::Multicorrelation})
        if (name == run_kind_name(k)) return k;
    throw ParseError("unknown experiment kind '" + name + "'");
}

OutputFormat format_from_name(const std::string& name) {
    if (name == "csv") return OutputFormat::Csv;
    if (name == "json") return OutputFormat::Json;
    throw ParseError("unknown output format '" + name + "' (expected csv or json)");
}

std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string fmt_i(i64 v) { return std::to_string(v); }
std::string fmt_u(u64 v) { return std::to_string(v); }
std::string fmt_b(bool v) { return v ? "true" : "false"; }

u64 fnv1a(const std::string& bytes) {
    u64 h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

// Accumulates problems; every message carries the 1-based line of the first
// occurrence of the offending key in the source text (0 when unknown).
struct Ctx {
    const std::string& text;
    std::vector<std::string> errors;

    i64 line_of(const std::string& key) const {
        auto pos = text.find("\"" + key + "\"");
        if (pos == std::string::npos) return 0;
        return 1 + static_cast<i64>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
    }
    void err(const std::string& key, const std::string& msg) {
        errors.push_back("line " + std::to_string(line_of(key)) + ": " + msg);
    }
    void finish() const {
        if (errors.empty()) return;
        std::string joined;
        for (std::size_t i = 0; i < errors.size(); ++i) {
            if (i) joined += "\n";
            joined += errors[i];
        }
        throw ParseError(joined);
    }
};

void check_keys(Ctx& ctx, const json& obj, const char* where,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) ok = true;
        if (!ok) ctx.err(it.key(), std::string(where) + ": unknown key '" + it.key() + "'");
    }
}

bool get_int(Ctx& ctx, const json& obj, const char* key, i64& out) {
    if (!obj.contains(key)) return false;
    if (!obj[key].is_number_integer()) {
        ctx.err(key, std::string("'") + key + "' must be an integer");
        return false;
    }
    out = obj[key].get<i64>();
    return true;
}

bool get_u64(Ctx& ctx, const json& obj, const char* key, u64& out) {
    if (!obj.contains(key)) return false;
    if (!obj[key].is_number_integer() && !obj[key].is_number_unsigned()) {
        ctx.err(key, std::string("'") + key + "' must be an integer");
        return false;
    }
    out = obj[key].get<u64>();
    return true;
}

bool get_num(Ctx& ctx, const json& obj, const char* key, double& out) {
    if (!obj.contains(key)) return false;
    if (!obj[key].is_number()) {
        ctx.err(key, std::string("'") + key + "' must be a number");
        return false;
    }
    out = obj[key].get<double>();
    return true;
}

bool get_bool(Ctx& ctx, const json& obj, const char* key, bool& out) {
    if (!obj.contains(key)) return false;
    if (!obj[key].is_boolean()) {
        ctx.err(key, std::string("'") + key + "' must be a boolean");
        return false;
    }
    out = obj[key].get<bool>();
    return true;
}

std::optional<TorusCoord> parse_coord(Ctx& ctx, const json& v, const char* where) {
    if (!v.is_string()) {
        ctx.err(where, std::string(where) + ": coordinate must be a string "
                       "(\"golden\", \"sqrt2m1\", \"p/q\", or \"0x<16 hex digits>\")");
        return std::nullopt;
    }
    const std::string s = v.get<std::string>();
    try {
        if (s == "golden") return alpha_golden();
        if (s == "sqrt2m1") return alpha_sqrt2m1();
        if (s.rfind("0x", 0) == 0) {
            if (s.size() < 3 || s.size() > 18 ||
                s.find_first_not_of("0123456789abcdefABCDEF", 2) != std::string::npos)
                throw ParseError("malformed hex coordinate '" + s + "'");
            return TorusCoord{std::stoull(s.substr(2), nullptr, 16)};
        }
        auto slash = s.find('/');
        if (slash != std::string::npos) {
            i64 p = std::stoll(s.substr(0, slash));
            i64 q = std::stoll(s.substr(slash + 1));
            return coord_from_fraction(p, q);
        }
        throw ParseError("unrecognized coordinate '" + s + "'");
    } catch (const std::exception& e) {
        ctx.err(where, std::string(where) + ": " + e.what());
        return std::nullopt;
    }
}

std::optional<IntervalUnion> parse_iu(Ctx& ctx, const json& v, const char* where) {
    if (v.is_string() && v.get<std::string>() == "full") return iu_full();
    if (!v.is_array()) {
        ctx.err(where, std::string(where) + ": expected \"full\" or an array of [lo, hi) pairs");
        return std::nullopt;
    }
    std::vector<std::pair<TorusCoord, TorusCoord>> pairs;
    for (const json& pair : v) {
        if (!pair.is_array() || pair.size() != 2) {
            ctx.err(where, std::string(where) + ": each interval must be a [lo, hi) pair");
            return std::nullopt;
        }
        auto lo = parse_coord(ctx, pair[0], where);
        auto hi = parse_coord(ctx, pair[1], where);
        if (!lo || !hi) return std::nullopt;
        pairs.push_back({*lo, *hi});
    }
    return iu_from_pairs(pairs);
}

std::optional<SetSpec> parse_set(Ctx& ctx, const json& obj, const char* where) {
    if (!obj.is_object() || !obj.contains("kind") || !obj["kind"].is_string()) {
        ctx.err(where, std::string(where) + ": set needs a \"kind\" string");
        return std::nullopt;
    }
    const std::string kind = obj["kind"].get<std::string>();
    try {
        if (kind == "full") {
            check_keys(ctx, obj, where, {"kind"});
            return make_full();
        }
        if (kind == "interval") {
            check_keys(ctx, obj, where, {"kind", "coord", "intervals"});
            i64 coord = 0;
            get_int(ctx, obj, "coord", coord);
            if (!obj.contains("intervals")) {
                ctx.err("intervals", std::string(where) + ": interval set needs \"intervals\"");
                return std::nullopt;
            }
            auto iu = parse_iu(ctx, obj["intervals"], where);
            if (!iu) return std::nullopt;
            return make_interval_set(coord, *iu);
        }
        if (kind == "cylinder") {
            check_keys(ctx, obj, where, {"kind", "factors"});
            if (!obj.contains("factors") || !obj["factors"].is_array()) {
                ctx.err("factors", std::string(where) + ": cylinder set needs a \"factors\" array");
                return std::nullopt;
            }
            std::vector<IntervalUnion> factors;
            for (const json& f : obj["factors"]) {
                auto iu = parse_iu(ctx, f, where);
                if (!iu) return std::nullopt;
                factors.push_back(*iu);
            }
            return make_cylinder(std::move(factors));
        }
        if (kind == "bits") {
            check_keys(ctx, obj, where, {"kind", "modulus", "members"});
            i64 modulus = 0;
            if (!get_int(ctx, obj, "modulus", modulus)) {
                ctx.err("modulus", std::string(where) + ": bit set needs \"modulus\"");
                return std::nullopt;
            }
            std::vector<i64> members;
            if (obj.contains("members")) {
                if (!obj["members"].is_array()) {
                    ctx.err("members", std::string(where) + ": \"members\" must be an array");
                    return std::nullopt;
                }
                for (const json& m : obj["members"]) {
                    if (!m.is_number_integer()) {
                        ctx.err("members", std::string(where) + ": members must be integers");
                        return std::nullopt;
                    }
                    members.push_back(m.get<i64>());
                }
            }
            return make_bitvector(modulus, members);
        }
    } catch (const std::exception& e) {
        ctx.err("kind", std::string(where) + ": " + e.what());
        return std::nullopt;
    }
    ctx.err("kind", std::string(where) + ": unknown set kind '" + kind + "'");
    return std::nullopt;
}

std::optional<std::vector<i64>> parse_freq(Ctx& ctx, const json& v, const char* where) {
    if (!v.is_array()) {
        ctx.err(where, std::string(where) + ": frequency must be an integer array");
        return std::nullopt;
    }
    std::vector<i64> out;
    for (const json& f : v) {
        if (!f.is_number_integer()) {
            ctx.err(where, std::string(where) + ": frequency entries must be integers");
            return std::nullopt;
        }
        out.push_back(f.get<i64>());
    }
    return out;
}

std::optional<Observable> parse_observable(Ctx& ctx, const json& obj, const char* where) {
    if (!obj.is_object() || !obj.contains("kind") || !obj["kind"].is_string()) {
        ctx.err(where, std::string(where) + ": observable needs a \"kind\" string");
        return std::nullopt;
    }
    const std::string kind = obj["kind"].get<std::string>();
    try {
        if (kind == "character") {
            check_keys(ctx, obj, where, {"kind", "freq"});
            if (!obj.contains("freq")) {
                ctx.err("freq", std::string(where) + ": character needs \"freq\"");
                return std::nullopt;
            }
            auto freq = parse_freq(ctx, obj["freq"], where);
            if (!freq) return std::nullopt;
            return obs_character(*freq);
        }
        if (kind == "trig") {
            check_keys(ctx, obj, where, {"kind", "terms"});
            if (!obj.contains("terms") || !obj["terms"].is_array()) {
                ctx.err("terms", std::string(where) + ": trig observable needs a \"terms\" array");
                return std::nullopt;
            }
            std::vector<std::pair<std::vector<i64>, cplx>> terms;
            for (const json& t : obj["terms"]) {
                if (!t.is_object()) {
                    ctx.err("terms", std::string(where) + ": each term must be an object");
                    return std::nullopt;
                }
                check_keys(ctx, t, where, {"freq", "re", "im"});
                if (!t.contains("freq")) {
                    ctx.err("terms", std::string(where) + ": each term needs \"freq\"");
                    return std::nullopt;
                }
                auto freq = parse_freq(ctx, t["freq"], where);
                if (!freq) return std::nullopt;
                double re = 0.0, im = 0.0;
                get_num(ctx, t, "re", re);
                get_num(ctx, t, "im", im);
                terms.push_back({*freq, cplx{re, im}});
            }
            return obs_trig(std::move(terms));
        }
        if (kind == "indicator") {
            check_keys(ctx, obj, where, {"kind", "set"});
            if (!obj.contains("set")) {
                ctx.err("set", std::string(where) + ": indicator needs \"set\"");
                return std::nullopt;
            }
            auto s = parse_set(ctx, obj["set"], where);
            if (!s) return std::nullopt;
            return obs_indicator(*s);
        }
        if (kind == "conj") {
            check_keys(ctx, obj, where, {"kind", "child"});
            if (!obj.contains("child")) {
                ctx.err("child", std::string(where) + ": conj needs \"child\"");
                return std::nullopt;
            }
            auto c = parse_observable(ctx, obj["child"], where);
            if (!c) return std::nullopt;
            return obs_conj(*c);
        }
        if (kind == "scale") {
            check_keys(ctx, obj, where, {"kind", "re", "im", "child"});
            if (!obj.contains("child")) {
                ctx.err("child", std::string(where) + ": scale needs \"child\"");
                return std::nullopt;
            }
            double re = 1.0, im = 0.0;
            get_num(ctx, obj, "re", re);
            get_num(ctx, obj, "im", im);
            auto c = parse_observable(ctx, obj["child"], where);
            if (!c) return std::nullopt;
            return obs_scale(cplx{re, im}, *c);
        }
        if (kind == "sum" || kind == "product") {
            check_keys(ctx, obj, where, {"kind", "children"});
            if (!obj.contains("children") || !obj["children"].is_array()) {
                ctx.err("children", std::string(where) + ": " + kind + " needs a \"children\" array");
                return std::nullopt;
            }
            std::vector<Observable> children;
            for (const json& c : obj["children"]) {
                auto o = parse_observable(ctx, c, where);
                if (!o) return std::nullopt;
                children.push_back(*o);
            }
            return kind == "sum" ? obs_sum(std::move(children)) : obs_product(std::move(children));
        }
    } catch (const std::exception& e) {
        ctx.err("kind", std::string(where) + ": " + e.what());
        return std::nullopt;
    }
    ctx.err("kind", std::string(where) + ": unknown observable kind '" + kind + "'");
    return std::nullopt;
}

std::optional<SystemSpec> parse_system(Ctx& ctx, const json& obj) {
    if (!obj.is_object() || !obj.contains("kind") || !obj["kind"].is_string()) {
        ctx.err("system", "system: needs a \"kind\" string");
        return std::nullopt;
    }
    const std::string kind = obj["kind"].get<std::string>();
    try {
        if (kind == "cyclic") {
            check_keys(ctx, obj, "system", {"kind", "modulus", "shift"});
            i64 modulus = 0, shift = 0;
            if (!get_int(ctx, obj, "modulus", modulus)) {
                ctx.err("modulus", "system: cyclic needs \"modulus\"");
                return std::nullopt;
            }
            get_int(ctx, obj, "shift", shift);
            return make_cyclic(modulus, shift);
        }
        if (kind == "rotation") {
            check_keys(ctx, obj, "system", {"kind", "alpha"});
            if (!obj.contains("alpha") || !obj["alpha"].is_array()) {
                ctx.err("alpha", "system: rotation needs an \"alpha\" array");
                return std::nullopt;
            }
            std::vector<TorusCoord> alpha;
            for (const json& a : obj["alpha"]) {
                auto c = parse_coord(ctx, a, "alpha");
                if (!c) return std::nullopt;
                alpha.push_back(*c);
            }
            return make_rotation(std::move(alpha));
        }
        if (kind == "skew" || kind == "skew-nil" || kind == "skew3") {
            check_keys(ctx, obj, "system", {"kind", "alpha"});
            if (!obj.contains("alpha")) {
                ctx.err("alpha", "system: " + kind + " needs \"alpha\"");
                return std::nullopt;
            }
            auto c = parse_coord(ctx, obj["alpha"], "alpha");
            if (!c) return std::nullopt;
            if (kind == "skew3") return make_skew3(*c);
            return make_skew(*c, kind == "skew-nil");
        }
        if (kind == "heisenberg") {
            check_keys(ctx, obj, "system", {"kind", "translation"});
            if (!obj.contains("translation") || !obj["translation"].is_array() ||
                obj["translation"].size() != 3) {
                ctx.err("translation", "system: heisenberg needs a 3-entry \"translation\" array");
                return std::nullopt;
            }
            std::vector<TorusCoord> t;
            for (const json& a : obj["translation"]) {
                auto c = parse_coord(ctx, a, "translation");
                if (!c) return std::nullopt;
                t.push_back(*c);
            }
            return make_heisenberg(t[0], t[1], t[2]);
        }
        if (kind == "product" || kind == "commuting") {
            check_keys(ctx, obj, "system", {"kind", "components"});
            if (!obj.contains("components") || !obj["components"].is_array()) {
                ctx.err("components", "system: " + kind + " needs a \"components\" array");
                return std::nullopt;
            }
            std::vector<SystemSpec> parts;
            for (const json& p : obj["components"]) {
                auto s = parse_system(ctx, p);
                if (!s) return std::nullopt;
                parts.push_back(*s);
            }
            return kind == "product" ? make_product(std::move(parts))
                                     : make_commuting(std::move(parts));
        }
    } catch (const std::exception& e) {
        ctx.err("kind", std::string("system: ") + e.what());
        return std::nullopt;
    }
    ctx.err("kind", "system: unknown system kind '" + kind + "'");
    return std::nullopt;
}

// Work guards checked before dispatch, so a bad config fails at parse time
// with a message naming the guard.
void guard_precheck(Ctx& ctx, const ExperimentConfig& cfg) {
    if (cfg.N < 1) ctx.err("N", "'N' must be at least 1");
    if (cfg.horizon < 1) ctx.err("horizon", "'horizon' must be at least 1");
    if (cfg.M < 1) ctx.err("M", "'M' must be at least 1");
    if (cfg.k < 1) ctx.err("k", "'k' must be at least 1");
    if (cfg.n_max < 0) ctx.err("n_max", "'n_max' must be nonnegative");
    if (cfg.L < 2) ctx.err("L", "'L' must be at least 2");
    if (cfg.sup_horizon < 1) ctx.err("sup_horizon", "'sup_horizon' must be at least 1");
    if (cfg.eps < 0.0) ctx.err("eps", "'eps' must be nonnegative");

    const u128 cap = u128(1) << 32;
    if (cfg.kind == RunKind::Cube) {
        u128 cells = 1;
        for (i64 i = 0; i < cfg.k && cells <= cap; ++i) cells *= u128(cfg.N);
        if (cells > cap)
            ctx.err("N", "cube: N^k exceeds the 2^32 work guard");
    }
    if (cfg.kind == RunKind::Behrend || cfg.kind == RunKind::Counterexample) {
        if (cfg.L > (i64(1) << 22))
            ctx.err("L", "behrend: L exceeds the 2^22 scale guard");
    }
    if (cfg.kind == RunKind::Counterexample) {
        u128 work = u128(64) * u128(cfg.L) * u128(cfg.L) * u128(cfg.sup_horizon) *
                    u128(cfg.sup_horizon + 1) / 2;
        if (work > cap)
            ctx.err("L", "counterexample: 64 L^2 sup_horizon^2 / 2 exceeds the 2^32 work guard");
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
        byte = std::min(byte, text.size());
        i64 line = 1 + static_cast<i64>(std::count(text.begin(),
                                                   text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
        throw ParseError("line " + std::to_string(line) + ": " + e.what());
    }

    Ctx ctx{text, {}};
    if (!doc.is_object()) {
        ctx.err("", "top level must be a JSON object");
        ctx.finish();
    }
    check_keys(ctx, doc, "config",
               {"version", "kind", "system", "observables", "set", "pattern", "N", "horizon",
                "M", "k", "n_max", "L", "sup_horizon", "eps", "seed", "xi", "signal",
                "require_pass"});

    ExperimentConfig cfg;
    if (!get_int(ctx, doc, "version", cfg.version))
        ctx.err("version", "missing required key 'version'");
    else if (cfg.version != kConfigVersion)
        ctx.err("version", "unsupported config version " + std::to_string(cfg.version) +
                               " (expected " + std::to_string(kConfigVersion) + ")");

    if (!doc.contains("kind") || !doc["kind"].is_string()) {
        ctx.err("kind", "missing required key 'kind'");
    } else {
        try {
            cfg.kind = run_kind_from_name(doc["kind"].get<std::string>());
        } catch (const std::exception& e) {
            ctx.err("kind", e.what());
        }
    }

    if (doc.contains("system")) {
        auto s = parse_system(ctx, doc["system"]);
        if (s) cfg.system = *s;
    }
    if (doc.contains("observables")) {
        if (!doc["observables"].is_array()) {
            ctx.err("observables", "'observables' must be an array");
        } else {
            for (const json& o : doc["observables"]) {
                auto f = parse_observable(ctx, o, "observables");
                if (f) cfg.observables.push_back(*f);
            }
        }
    }
    if (doc.contains("set")) {
        auto s = parse_set(ctx, doc["set"], "set");
        if (s) cfg.set = *s;
    }
    if (doc.contains("pattern")) {
        if (!doc["pattern"].is_array()) {
            ctx.err("pattern", "'pattern' must be an array of integer arrays");
        } else {
            for (const json& poly : doc["pattern"]) {
                auto coeffs = parse_freq(ctx, poly, "pattern");
                if (coeffs) cfg.pattern.push_back(*coeffs);
            }
        }
    }

    get_int(ctx, doc, "N", cfg.N);
    get_int(ctx, doc, "horizon", cfg.horizon);
    get_int(ctx, doc, "M", cfg.M);
    get_int(ctx, doc, "k", cfg.k);
    get_int(ctx, doc, "n_max", cfg.n_max);
    get_int(ctx, doc, "L", cfg.L);
    get_int(ctx, doc, "sup_horizon", cfg.sup_horizon);
    get_num(ctx, doc, "eps", cfg.eps);
    get_u64(ctx, doc, "seed", cfg.seed);
    get_bool(ctx, doc, "require_pass", cfg.require_pass);

    if (doc.contains("xi")) {
        auto xi = parse_freq(ctx, doc["xi"], "xi");
        if (xi) cfg.xi = *xi;
    }
    if (doc.contains("signal")) {
        if (!doc["signal"].is_array()) {
            ctx.err("signal", "'signal' must be an array of [re, im] pairs");
        } else {
            for (const json& v : doc["signal"]) {
                if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
                    ctx.err("signal", "'signal' entries must be [re, im] number pairs");
                    break;
                }
                cfg.signal.push_back({v[0].get<double>(), v[1].get<double>()});
            }
        }
    }

    guard_precheck(ctx, cfg);
    ctx.finish();
    return cfg;
}

namespace {

std::string emit_coord(TorusCoord c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%016" PRIx64, c.raw);
    return buf;
}

json emit_iu(const IntervalUnion& u) {
    if (u.full) return json("full");
    json arr = json::array();
    for (const auto& a : u.arcs) {
        u64 end = a.start + a.len;  // wraps to 0 exactly at the full-circle mark
        arr.push_back(json::array({emit_coord(TorusCoord{a.start}), emit_coord(TorusCoord{end})}));
    }
    return arr;
}

json emit_set(const SetSpec& s) {
    json o = json::object();
    switch (s.kind) {
        case SetSpec::Kind::FullSpace:
            o["kind"] = "full";
            return o;
        case SetSpec::Kind::TorusIntervals:
            o["kind"] = "interval";
            o["coord"] = s.coord;
            o["intervals"] = emit_iu(s.intervals);
            return o;
        case SetSpec::Kind::CylinderProduct: {
            o["kind"] = "cylinder";
            json f = json::array();
            for (const auto& iu : s.cylinder) f.push_back(emit_iu(iu));
            o["factors"] = f;
            return o;
        }
        case SetSpec::Kind::BitVectorSet: {
            o["kind"] = "bits";
            o["modulus"] = s.modulus;
            json m = json::array();
            for (i64 r = 0; r < s.modulus; ++r)
                if (s.bits[static_cast<std::size_t>(r)]) m.push_back(r);
            o["members"] = m;
            return o;
        }
    }
    return o;
}

json emit_observable(const Observable& f) {
    json o = json::object();
    switch (f.kind) {
        case Observable::Kind::Character:
            o["kind"] = "character";
            o["freq"] = f.freq;
            return o;
        case Observable::Kind::TrigPoly: {
            o["kind"] = "trig";
            json terms = json::array();
            for (const auto& [xi, c] : f.terms) {
                json t = json::object();
                t["freq"] = xi;
                t["re"] = c.real();
                t["im"] = c.imag();
                terms.push_back(t);
            }
            o["terms"] = terms;
            return o;
        }
        case Observable::Kind::Indicator:
            o["kind"] = "indicator";
            o["set"] = emit_set(f.set);
            return o;
        case Observable::Kind::Conjugate:
            o["kind"] = "conj";
            o["child"] = emit_observable(f.children.at(0));
            return o;
        case Observable::Kind::Scale:
            o["kind"] = "scale";
            o["re"] = f.factor.real();
            o["im"] = f.factor.imag();
            o["child"] = emit_observable(f.children.at(0));
            return o;
        case Observable::Kind::Sum:
        case Observable::Kind::Product: {
            o["kind"] = f.kind == Observable::Kind::Sum ? "sum" : "product";
            json ch = json::array();
            for (const auto& c : f.children) ch.push_back(emit_observable(c));
            o["children"] = ch;
            return o;
        }
    }
    return o;
}

json emit_system(const SystemSpec& sys) {
    json o = json::object();
    switch (sys.kind) {
        case SystemKind::Cyclic:
            o["kind"] = "cyclic";
            o["modulus"] = sys.modulus;
            o["shift"] = sys.shift;
            return o;
        case SystemKind::Rotation: {
            o["kind"] = "rotation";
            json a = json::array();
            for (const auto& c : sys.alpha) a.push_back(emit_coord(c));
            o["alpha"] = a;
            return o;
        }
        case SystemKind::SkewPlain:
        case SystemKind::SkewNil:
        case SystemKind::Skew3:
            o["kind"] = sys.kind == SystemKind::SkewPlain ? "skew"
                        : sys.kind == SystemKind::SkewNil ? "skew-nil"
                                                          : "skew3";
            o["alpha"] = emit_coord(sys.alpha.at(0));
            return o;
        case SystemKind::Heisenberg: {
            o["kind"] = "heisenberg";
            json t = json::array();
            for (const auto& c : sys.translation) t.push_back(emit_coord(c));
            o["translation"] = t;
            return o;
        }
        case SystemKind::Product:
        case SystemKind::Commuting: {
            o["kind"] = sys.kind == SystemKind::Product ? "product" : "commuting";
            json parts = json::array();
            for (const auto& p : sys.components) parts.push_back(emit_system(p));
            o["components"] = parts;
            return o;
        }
    }
    return o;
}

}  // namespace

std::string emit_config(const ExperimentConfig& cfg) {
    json o = json::object();
    o["version"] = cfg.version;
    o["kind"] = run_kind_name(cfg.kind);
    if (cfg.system) o["system"] = emit_system(*cfg.system);
    if (!cfg.observables.empty()) {
        json arr = json::array();
        for (const auto& f : cfg.observables) arr.push_back(emit_observable(f));
        o["observables"] = arr;
    }
    if (cfg.set) o["set"] = emit_set(*cfg.set);
    if (!cfg.pattern.empty()) o["pattern"] = cfg.pattern;
    o["N"] = cfg.N;
    o["horizon"] = cfg.horizon;
    o["M"] = cfg.M;
    o["k"] = cfg.k;
    o["n_max"] = cfg.n_max;
    o["L"] = cfg.L;
    o["sup_horizon"] = cfg.sup_horizon;
    o["eps"] = cfg.eps;
    o["seed"] = cfg.seed;
    if (!cfg.xi.empty()) o["xi"] = cfg.xi;
    if (!cfg.signal.empty()) {
        json arr = json::array();
        for (const auto& v : cfg.signal) arr.push_back(json::array({v[0], v[1]}));
        o["signal"] = arr;
    }
    o["require_pass"] = cfg.require_pass;
    return o.dump(2) + "\n";
}

u64 config_hash(const ExperimentConfig& cfg) { return fnv1a(emit_config(cfg)); }

PhasePoint zero_point(const SystemSpec& sys) {
    switch (sys.kind) {
        case SystemKind::Cyclic:
            return cyclic_point(sys.modulus, 0);
        case SystemKind::Rotation:
        case SystemKind::Commuting: {
            i64 d = sys.kind == SystemKind::Rotation
                        ? static_cast<i64>(sys.alpha.size())
                        : static_cast<i64>(sys.components.at(0).alpha.size());
            return torus_point(std::vector<TorusCoord>(static_cast<std::size_t>(d)));
        }
        case SystemKind::SkewPlain:
            return skew_point(TorusCoord{0}, TorusCoord{0}, false);
        case SystemKind::SkewNil:
            return skew_point(TorusCoord{0}, TorusCoord{0}, true);
        case SystemKind::Skew3:
            return skew3_point(TorusCoord{0}, TorusCoord{0}, TorusCoord{0});
        case SystemKind::Heisenberg:
            return heis_point(TorusCoord{0}, TorusCoord{0}, Frac128{});
        case SystemKind::Product: {
            std::vector<PhasePoint> parts;
            for (const auto& p : sys.components) parts.push_back(zero_point(p));
            return product_point(std::move(parts));
        }
    }
    throw CapabilityError("zero point: unsupported system");
}

namespace {

std::string fmt_hash(u64 h) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%016" PRIx64, h);
    return buf;
}

void checkpoint_rows(RunRecord& rec, const AverageReport& r) {
    rec.columns = {"checkpoint", "n_partial", "re", "im"};
    for (i64 i = 0; i < 4; ++i) {
        i64 mark = ((i + 1) * r.N + 3) / 4;
        const cplx& v = r.checkpoints[static_cast<std::size_t>(i)];
        rec.rows.push_back({fmt_i(i + 1), fmt_i(mark), format_float(v.real()),
                            format_float(v.imag())});
    }
    rec.summary.push_back({"N", fmt_i(r.N)});
    rec.summary.push_back({"value_re", format_float(r.value.real())});
    rec.summary.push_back({"value_im", format_float(r.value.imag())});
    rec.summary.push_back({"value_abs", format_float(std::abs(r.value))});
    rec.summary.push_back({"oscillation", format_float(r.oscillation)});
}

void run_average(const ExperimentConfig& cfg, RunRecord& rec, int threads) {
    if (!cfg.system) throw DomainError("average: config needs a \"system\"");
    if (cfg.observables.empty()) throw DomainError("average: config needs \"observables\"");
    IteratePattern pat = cfg.pattern.empty()
                             ? linear_pattern(static_cast<i64>(cfg.observables.size()))
                             : make_pattern(cfg.pattern);
    AverageReport r = multi_average_pointwise(*cfg.system, cfg.observables, pat,
                                              zero_point(*cfg.system), cfg.N, threads);
    checkpoint_rows(rec, r);
}

void run_gowers(const ExperimentConfig& cfg, RunRecord& rec, int threads) {
    std::vector<cplx> values;
    if (!cfg.signal.empty()) {
        for (const auto& v : cfg.signal) values.push_back(cplx{v[0], v[1]});
    } else {
        std::mt19937_64 rng(cfg.seed);
        auto unit = [&]() { return std::ldexp(static_cast<double>(rng() >> 11), -53); };
        for (i64 i = 0; i < cfg.N; ++i)
            values.push_back(cplx{2.0 * unit() - 1.0, 2.0 * unit() - 1.0});
    }
    ComplexSignal f = make_signal(std::move(values));

    rec.columns = {"k", "method", "value"};
    for (i64 j = 1; j <= cfg.k; ++j) {
        GowersValue g = gowers_norm(f, j, threads);
        rec.rows.push_back({fmt_i(j), "recursive", format_float(g.value)});
        if (j == 2) {
            GowersValue sp = gowers_u2_spectral(f);
            rec.rows.push_back({fmt_i(j), "spectral", format_float(sp.value)});
        }
        if (f.N <= 32 && j <= 3) {
            GowersValue cs = gowers_norm_cube_sum(f, j, threads);
            rec.rows.push_back({fmt_i(j), "cube_sum", format_float(cs.value)});
        }
    }
    rec.summary.push_back({"N", fmt_i(f.N)});
    rec.summary.push_back({"seed", fmt_u(cfg.seed)});
    rec.summary.push_back({"explicit_signal", fmt_b(!cfg.signal.empty())});
}

void run_scan(const ExperimentConfig& cfg, RunRecord& rec, int threads) {
    if (!cfg.system) throw DomainError("scan: config needs a \"system\"");
    if (!cfg.set) throw DomainError("scan: config needs a \"set\"");
    ScanReport r = khintchine_scan(*cfg.system, *cfg.set, cfg.k, cfg.eps, cfg.horizon, cfg.M,
                                   threads);
    rec.columns = {"n", "value", "good"};
    for (i64 n = 0; n <= r.horizon; ++n)
        rec.rows.push_back({fmt_i(n), format_float(r.values[static_cast<std::size_t>(n)]),
                            n >= 1 && r.good_set.contains(n) ? "1" : "0"});
    rec.pass = r.good_set.size() > 0;
    rec.summary.push_back({"k", fmt_i(r.k)});
    rec.summary.push_back({"threshold", format_float(r.threshold)});
    rec.summary.push_back({"good_count", fmt_i(r.good_set.size())});
    rec.summary.push_back({"max_gap", fmt_i(r.max_gap)});
}

void run_behrend(const ExperimentConfig& cfg, RunRecord& rec) {
    IntegerWindowSet E = behrend_set(cfg.L);
    bool bad = has_3ap(E);
    rec.columns = {"member"};
    for (i64 x : E.to_list()) rec.rows.push_back({fmt_i(x)});
    rec.pass = !bad;
    rec.summary.push_back({"L", fmt_i(cfg.L)});
    rec.summary.push_back({"size", fmt_i(E.size())});
    rec.summary.push_back({"has_3ap", fmt_b(bad)});
    rec.summary.push_back({"density", format_float(E.density())});
}

void run_counterexample(const ExperimentConfig& cfg, RunRecord& rec) {
    CounterexampleReport r = triple_counterexample(cfg.L, cfg.sup_horizon);
    rec.columns = {"n", "triple_intersection"};
    for (i64 n = 1; n <= r.sup_horizon; ++n)
        rec.rows.push_back({fmt_i(n), format_float(r.direct_values[static_cast<std::size_t>(n - 1)])});
    rec.pass = r.sup_intersection <= r.bound;
    rec.summary.push_back({"L", fmt_i(r.L)});
    rec.summary.push_back({"set_size", fmt_i(r.set_size)});
    rec.summary.push_back({"m_B", format_float(r.m_B)});
    rec.summary.push_back({"mu_A", format_float(r.mu_A)});
    rec.summary.push_back({"integral_value", format_float(r.integral_value)});
    rec.summary.push_back({"lattice_count", fmt_i(r.lattice_count)});
    rec.summary.push_back({"sup_intersection", format_float(r.sup_intersection)});
    rec.summary.push_back({"bound", format_float(r.bound)});
    rec.summary.push_back({"bound_holds", fmt_b(rec.pass)});
    rec.summary.push_back({"best_ell", fmt_i(r.best_ell)});
}

void run_cube(const ExperimentConfig& cfg, RunRecord& rec, int threads) {
    if (!cfg.system) throw DomainError("cube: config needs a \"system\"");
    AverageReport r;
    if (cfg.set) {
        r = cube_average_sets(*cfg.system, *cfg.set, cfg.k, cfg.N, threads);
    } else if (!cfg.observables.empty()) {
        r = cube_average_integrated(*cfg.system, cfg.observables, cfg.N, cfg.M, threads);
    } else {
        throw DomainError("cube: config needs a \"set\" or \"observables\"");
    }
    checkpoint_rows(rec, r);
    rec.summary.push_back({"k", fmt_i(cfg.k)});
}

void run_weyl(const ExperimentConfig& cfg, RunRecord& rec, int threads) {
    if (!cfg.system) throw DomainError("weyl: config needs a \"system\"");
    std::vector<i64> xi = cfg.xi;
    if (xi.empty()) xi.assign(static_cast<std::size_t>(coord_count(*cfg.system)), 1);
    cplx w = weyl_sum(*cfg.system, xi, zero_point(*cfg.system), cfg.N, threads);
    rec.columns = {"re", "im", "abs"};
    rec.rows.push_back({format_float(w.real()), format_float(w.imag()),
                        format_float(std::abs(w))});
    std::string xistr;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        if (i) xistr += " ";
        xistr += fmt_i(xi[i]);
    }
    rec.summary.push_back({"N", fmt_i(cfg.N)});
    rec.summary.push_back({"xi", xistr});
}

void run_multicorrelation(const ExperimentConfig& cfg, RunRecord& rec, int threads) {
    if (!cfg.system) throw DomainError("multicorrelation: config needs a \"system\"");
    if (cfg.observables.size() != 1)
        throw DomainError("multicorrelation: config needs exactly one observable");
    MulticorrelationSeries s =
        multicorrelation(*cfg.system, cfg.observables[0], cfg.k, cfg.n_max, cfg.M, threads);
    rec.columns = {"n", "re", "im"};
    for (i64 n = 0; n <= cfg.n_max; ++n) {
        const cplx& v = s.values[static_cast<std::size_t>(n)];
        rec.rows.push_back({fmt_i(n), format_float(v.real()), format_float(v.imag())});
    }
    rec.summary.push_back({"k", fmt_i(s.k)});
    rec.summary.push_back({"system_kind", s.system_kind});
    rec.summary.push_back({"observable_kind", s.observable_kind});
}

}  // namespace

RunRecord run_experiment(const ExperimentConfig& cfg, int threads) {
    RunRecord rec;
    rec.kind = run_kind_name(cfg.kind);
    rec.hash = config_hash(cfg);
    rec.require_pass = cfg.require_pass;

    auto begin = std::chrono::steady_clock::now();
    try {
        switch (cfg.kind) {
            case RunKind::Average: run_average(cfg, rec, threads); break;
            case RunKind::Gowers: run_gowers(cfg, rec, threads); break;
            case RunKind::Scan: run_scan(cfg, rec, threads); break;
            case RunKind::Behrend: run_behrend(cfg, rec); break;
            case RunKind::Counterexample: run_counterexample(cfg, rec); break;
            case RunKind::Cube: run_cube(cfg, rec, threads); break;
            case RunKind::Weyl: run_weyl(cfg, rec, threads); break;
            case RunKind::Multicorrelation: run_multicorrelation(cfg, rec, threads); break;
        }
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(rec.kind) + ": " + e.what());
    }
    auto end = std::chrono::steady_clock::now();
    rec.wall_ms = std::chrono::duration<double, std::milli>(end - begin).count();
    return rec;
}

std::string emit_record(const RunRecord& rec, OutputFormat format) {
    if (format == OutputFormat::Csv) {
        std::string out;
        out += "# ergo " + rec.library_version + "\n";
        out += "# kind=" + rec.kind + "\n";
        out += "# config=" + fmt_hash(rec.hash) + "\n";
        out += "# pass=" + std::string(rec.pass ? "true" : "false") + "\n";
        for (const auto& [k, v] : rec.summary) out += "# " + k + "=" + v + "\n";
        for (std::size_t i = 0; i < rec.columns.size(); ++i) {
            if (i) out += ",";
            out += rec.columns[i];
        }
        out += "\n";
        for (const auto& row : rec.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out += ",";
                out += row[i];
            }
            out += "\n";
        }
        return out;
    }

    json o = json::object();
    o["library_version"] = rec.library_version;
    o["kind"] = rec.kind;
    o["config_hash"] = fmt_hash(rec.hash);
    o["pass"] = rec.pass;
    json summary = json::object();
    for (const auto& [k, v] : rec.summary) summary[k] = v;
    o["summary"] = summary;
    o["columns"] = rec.columns;
    json rows = json::array();
    for (const auto& row : rec.rows) rows.push_back(row);
    o["rows"] = rows;
    return o.dump(2) + "\n";
}

}  // namespace ergo
