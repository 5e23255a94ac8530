#pragma once

// File formats: numeric CSV ingestion with strict diagnostics, flat
// key = value config files, a minimal JSON value (insertion-ordered keys,
// numbers printed with 17 significant digits so they survive a round trip),
// and the CSV/JSON emitters for reports and rejection tables.

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pcatest/errors.hpp"
#include "pcatest/matrix.hpp"
#include "pcatest/montecarlo.hpp"
#include "pcatest/statistics.hpp"

namespace pcatest {

// ---------------------------------------------------------------------------
// CSV ingestion

struct Dataset {
    std::size_t n = 0, k = 0;
    Matrix x;
    std::vector<std::string> names;  // empty when the file has no header
};

namespace detail {

inline bool parseDouble(const std::string& tok, double& out) {
    const char* s = tok.c_str();
    char* end = nullptr;
    out = std::strtod(s, &end);
    if (end == s) return false;
    while (*end != '\0') {
        if (!std::isspace(static_cast<unsigned char>(*end))) return false;
        ++end;
    }
    return std::isfinite(out);
}

inline std::vector<std::string> splitCsvLine(const std::string& line) {
    std::vector<std::string> toks;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            toks.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    toks.push_back(cur);
    return toks;
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace detail

// Reads a rectangular numeric CSV. A header line is auto-detected: if any
// token on line 1 fails to parse as a finite number, the line is taken as
// column names. Malformed cells and ragged rows are hard errors naming the
// line (1-based) and column.
inline Dataset ingestCsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("ingestCsv: cannot open '" + path + "'");

    std::vector<std::vector<double>> rows;
    std::vector<std::string> names;
    std::string line;
    std::size_t lineNo = 0;
    std::size_t k = 0;
    bool first = true;

    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> toks = detail::splitCsvLine(line);

        if (first) {
            first = false;
            bool numeric = true;
            double tmp;
            for (const std::string& t : toks)
                if (!detail::parseDouble(detail::trim(t), tmp)) {
                    numeric = false;
                    break;
                }
            k = toks.size();
            if (!numeric) {
                for (std::string& t : toks) names.push_back(detail::trim(t));
                continue;
            }
        }

        if (toks.size() != k)
            throw validation_error("ingestCsv: line " + std::to_string(lineNo) + " has " +
                                   std::to_string(toks.size()) + " fields, expected " +
                                   std::to_string(k));
        std::vector<double> row(k);
        for (std::size_t j = 0; j < k; ++j) {
            if (!detail::parseDouble(detail::trim(toks[j]), row[j]))
                throw validation_error("ingestCsv: non-numeric or non-finite value '" +
                                       detail::trim(toks[j]) + "' at line " +
                                       std::to_string(lineNo) + ", column " +
                                       std::to_string(j + 1));
        }
        rows.push_back(std::move(row));
    }

    if (rows.empty()) throw validation_error("ingestCsv: no data rows in '" + path + "'");
    if (rows.size() <= k)
        throw validation_error("ingestCsv: need more rows than columns (n > k), got n = " +
                               std::to_string(rows.size()) + ", k = " + std::to_string(k));

    Dataset d;
    d.n = rows.size();
    d.k = k;
    d.names = std::move(names);
    d.x = Matrix(d.n, d.k);
    for (std::size_t i = 0; i < d.n; ++i)
        for (std::size_t j = 0; j < k; ++j) d.x(i, j) = rows[i][j];
    return d;
}

// ---------------------------------------------------------------------------
// flat key = value config files

// Returns the entries in file order. `#` starts a comment; blank lines are
// skipped; a non-blank line without `=` is an error.
inline std::vector<std::pair<std::string, std::string>> parseConfigFile(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("config: cannot open '" + path + "'");
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw validation_error("config: line " + std::to_string(lineNo) +
                                   " is not of the form key = value");
        const std::string key = detail::trim(body.substr(0, eq));
        const std::string value = detail::trim(body.substr(eq + 1));
        if (key.empty())
            throw validation_error("config: empty key at line " + std::to_string(lineNo));
        entries.emplace_back(key, value);
    }
    return entries;
}

namespace detail {

inline std::vector<std::string> splitList(const std::string& s) {
    std::vector<std::string> out;
    for (const std::string& t : splitCsvLine(s)) {
        const std::string v = trim(t);
        if (!v.empty()) out.push_back(v);
    }
    return out;
}

inline double configDouble(const std::string& key, const std::string& v) {
    double d;
    if (!parseDouble(v, d))
        throw validation_error("config: key '" + key + "' expects a number, got '" + v + "'");
    return d;
}

inline std::size_t configSize(const std::string& key, const std::string& v) {
    const double d = configDouble(key, v);
    if (d < 0 || d != double(std::size_t(d)))
        throw validation_error("config: key '" + key + "' expects a nonnegative integer");
    return std::size_t(d);
}

}  // namespace detail

// Builds a Scenario from config entries; unknown or duplicate keys are
// rejected. Keys: problem, k, n, reps, families, xi, lambda, methods, seed,
// q, alpha, rot_step, shift_step, cv, cv_reps, threads.
inline Scenario scenarioFromConfig(
    const std::vector<std::pair<std::string, std::string>>& entries) {
    Scenario sc;
    std::vector<std::string> seen;
    bool lambdaSet = false;
    for (const auto& [key, value] : entries) {
        for (const std::string& s : seen)
            if (s == key) throw validation_error("config: duplicate key '" + key + "'");
        seen.push_back(key);

        if (key == "problem") {
            if (value == "eigvec")
                sc.problem = Problem::eigvec;
            else if (value == "eigval")
                sc.problem = Problem::eigval;
            else
                throw validation_error("config: problem must be eigvec or eigval");
        } else if (key == "k") {
            sc.k = detail::configSize(key, value);
        } else if (key == "n") {
            sc.n = detail::configSize(key, value);
        } else if (key == "reps") {
            sc.reps = detail::configSize(key, value);
            if (sc.reps < 1) throw validation_error("config: reps must be >= 1");
        } else if (key == "families") {
            // parsed in a second pass so the final k is used
        } else if (key == "xi") {
            sc.xiGrid.clear();
            for (const std::string& t : detail::splitList(value)) {
                const double v = detail::configDouble(key, t);
                if (v < 0) throw validation_error("config: xi values must be nonnegative");
                sc.xiGrid.push_back(v);
            }
            if (sc.xiGrid.empty()) throw validation_error("config: xi list is empty");
        } else if (key == "lambda") {
            sc.lambda.clear();
            for (const std::string& t : detail::splitList(value))
                sc.lambda.push_back(detail::configDouble(key, t));
            lambdaSet = true;
        } else if (key == "methods") {
            sc.methods = detail::splitList(value);
        } else if (key == "seed") {
            sc.seed = detail::configSize(key, value);
        } else if (key == "q") {
            sc.q = detail::configSize(key, value);
        } else if (key == "alpha") {
            sc.alpha = detail::configDouble(key, value);
            if (!(sc.alpha > 0.0 && sc.alpha < 1.0))
                throw validation_error("config: alpha must lie in (0,1)");
        } else if (key == "rot_step") {
            sc.rotStep = detail::configDouble(key, value);
        } else if (key == "shift_step") {
            sc.shiftStep = detail::configDouble(key, value);
        } else if (key == "cv") {
            if (value == "asymptotic")
                sc.simulatedCv = false;
            else if (value == "simulated")
                sc.simulatedCv = true;
            else
                throw validation_error("config: cv must be asymptotic or simulated");
        } else if (key == "cv_reps") {
            sc.cvReps = detail::configSize(key, value);
        } else if (key == "threads") {
            sc.threads = detail::configSize(key, value);
        } else {
            throw validation_error("config: unknown key '" + key + "'");
        }
    }
    // families parse deferred so the final k is used
    for (const auto& [key, value] : entries)
        if (key == "families") {
            sc.families.clear();
            for (const std::string& f : detail::splitList(value))
                sc.families.push_back(parseFamily(f, sc.k));
        }
    if (sc.families.empty())
        throw validation_error("config: at least one family is required");
    if (sc.methods.empty()) throw validation_error("config: at least one method is required");
    if (!lambdaSet && sc.k != sc.lambda.size())
        throw validation_error("config: supply lambda when k != 3");
    return sc;
}

// ---------------------------------------------------------------------------
// JSON

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Minimal JSON document: objects keep their keys in insertion order, and
// numbers print with enough digits to round-trip.
struct JsonValue {
    enum class Kind { null, boolean, number, string, array, object };
    Kind kind = Kind::null;
    bool boolean = false;
    double number = 0.0;
    std::string text;
    std::vector<JsonValue> items;
    std::vector<std::pair<std::string, JsonValue>> members;

    static JsonValue makeNull() { return JsonValue{}; }
    static JsonValue make(bool v) {
        JsonValue j;
        j.kind = Kind::boolean;
        j.boolean = v;
        return j;
    }
    static JsonValue make(double v) {
        JsonValue j;
        j.kind = Kind::number;
        j.number = v;
        return j;
    }
    static JsonValue make(std::size_t v) { return make(double(v)); }
    static JsonValue make(std::string v) {
        JsonValue j;
        j.kind = Kind::string;
        j.text = std::move(v);
        return j;
    }
    static JsonValue makeArray() {
        JsonValue j;
        j.kind = Kind::array;
        return j;
    }
    static JsonValue makeObject() {
        JsonValue j;
        j.kind = Kind::object;
        return j;
    }

    JsonValue& set(const std::string& key, JsonValue v) {
        members.emplace_back(key, std::move(v));
        return *this;
    }
    JsonValue& push(JsonValue v) {
        items.push_back(std::move(v));
        return *this;
    }
    const JsonValue* find(const std::string& key) const {
        for (const auto& [k, v] : members)
            if (k == key) return &v;
        return nullptr;
    }

    void dump(std::string& out) const {
        switch (kind) {
            case Kind::null: out += "null"; break;
            case Kind::boolean: out += boolean ? "true" : "false"; break;
            case Kind::number:
                if (std::isfinite(number))
                    out += fmt17(number);
                else
                    out += "null";
                break;
            case Kind::string: dumpString(out, text); break;
            case Kind::array: {
                out += '[';
                for (std::size_t i = 0; i < items.size(); ++i) {
                    if (i) out += ',';
                    items[i].dump(out);
                }
                out += ']';
                break;
            }
            case Kind::object: {
                out += '{';
                for (std::size_t i = 0; i < members.size(); ++i) {
                    if (i) out += ',';
                    dumpString(out, members[i].first);
                    out += ':';
                    members[i].second.dump(out);
                }
                out += '}';
                break;
            }
        }
    }
    std::string dump() const {
        std::string out;
        dump(out);
        return out;
    }

private:
    static void dumpString(std::string& out, const std::string& s) {
        out += '"';
        for (char c : s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\r': out += "\\r"; break;
                case '\t': out += "\\t"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", c);
                        out += buf;
                    } else {
                        out += c;
                    }
            }
        }
        out += '"';
    }
};

namespace detail {

struct JsonParser {
    const std::string& s;
    std::size_t pos = 0;

    explicit JsonParser(const std::string& src) : s(src) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw validation_error("json: " + msg + " at offset " + std::to_string(pos));
    }
    void skipWs() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    char peek() {
        if (pos >= s.size()) fail("unexpected end");
        return s[pos];
    }
    void expect(char c) {
        if (pos >= s.size() || s[pos] != c) fail(std::string("expected '") + c + "'");
        ++pos;
    }
    bool consume(const char* lit) {
        const std::size_t len = std::string(lit).size();
        if (s.compare(pos, len, lit) == 0) {
            pos += len;
            return true;
        }
        return false;
    }

    JsonValue parseValue() {
        skipWs();
        const char c = peek();
        if (c == '{') return parseObject();
        if (c == '[') return parseArray();
        if (c == '"') return JsonValue::make(parseString());
        if (consume("null")) return JsonValue::makeNull();
        if (consume("true")) return JsonValue::make(true);
        if (consume("false")) return JsonValue::make(false);
        return parseNumber();
    }

    JsonValue parseObject() {
        expect('{');
        JsonValue obj = JsonValue::makeObject();
        skipWs();
        if (peek() == '}') {
            ++pos;
            return obj;
        }
        for (;;) {
            skipWs();
            std::string key = parseString();
            skipWs();
            expect(':');
            obj.set(key, parseValue());
            skipWs();
            if (peek() == ',') {
                ++pos;
                continue;
            }
            expect('}');
            return obj;
        }
    }

    JsonValue parseArray() {
        expect('[');
        JsonValue arr = JsonValue::makeArray();
        skipWs();
        if (peek() == ']') {
            ++pos;
            return arr;
        }
        for (;;) {
            arr.push(parseValue());
            skipWs();
            if (peek() == ',') {
                ++pos;
                continue;
            }
            expect(']');
            return arr;
        }
    }

    std::string parseString() {
        expect('"');
        std::string out;
        while (true) {
            if (pos >= s.size()) fail("unterminated string");
            char c = s[pos++];
            if (c == '"') return out;
            if (c != '\\') {
                out += c;
                continue;
            }
            if (pos >= s.size()) fail("bad escape");
            const char e = s[pos++];
            switch (e) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case '/': out += '/'; break;
                case 'n': out += '\n'; break;
                case 'r': out += '\r'; break;
                case 't': out += '\t'; break;
                case 'b': out += '\b'; break;
                case 'f': out += '\f'; break;
                case 'u': {
                    if (pos + 4 > s.size()) fail("bad unicode escape");
                    const unsigned code =
                        unsigned(std::strtoul(s.substr(pos, 4).c_str(), nullptr, 16));
                    pos += 4;
                    if (code < 0x80) {
                        out += char(code);
                    } else if (code < 0x800) {
                        out += char(0xC0 | (code >> 6));
                        out += char(0x80 | (code & 0x3F));
                    } else {
                        out += char(0xE0 | (code >> 12));
                        out += char(0x80 | ((code >> 6) & 0x3F));
                        out += char(0x80 | (code & 0x3F));
                    }
                    break;
                }
                default: fail("bad escape");
            }
        }
    }

    JsonValue parseNumber() {
        const char* start = s.c_str() + pos;
        char* end = nullptr;
        const double v = std::strtod(start, &end);
        if (end == start) fail("invalid number");
        pos += std::size_t(end - start);
        return JsonValue::make(v);
    }
};

}  // namespace detail

inline JsonValue parseJson(const std::string& text) {
    detail::JsonParser p(text);
    JsonValue v = p.parseValue();
    p.skipWs();
    if (p.pos != text.size()) throw validation_error("json: trailing content");
    return v;
}

// ---------------------------------------------------------------------------
// report and table emitters

inline JsonValue reportToJson(const TestReport& r) {
    JsonValue nuisance = JsonValue::makeObject();
    for (const auto& [key, value] : r.nuisance) nuisance.set(key, JsonValue::make(value));
    for (const auto& [key, value] : r.nuisanceText) nuisance.set(key, JsonValue::make(value));
    JsonValue out = JsonValue::makeObject();
    out.set("method", JsonValue::make(r.method));
    out.set("statistic", JsonValue::make(r.statistic));
    out.set("reference", JsonValue::make(r.reference));
    out.set("p_value", JsonValue::make(r.pValue));
    out.set("alpha", JsonValue::make(r.alpha));
    out.set("reject", JsonValue::make(r.reject));
    out.set("n", JsonValue::make(r.n));
    out.set("k", JsonValue::make(r.k));
    out.set("nuisance", std::move(nuisance));
    return out;
}

inline std::string tableToCsv(const RejectionTable& t) {
    std::string out = "method,family,xi,freq,N,n,alpha,cv_mode\n";
    for (const RejectionRow& r : t.rows) {
        out += r.method;
        out += ',';
        out += r.family;
        out += ',';
        out += fmt17(r.xi);
        out += ',';
        out += fmt17(r.freq);
        out += ',';
        out += std::to_string(r.reps);
        out += ',';
        out += std::to_string(r.n);
        out += ',';
        out += fmt17(r.alpha);
        out += ',';
        out += r.cvMode;
        out += '\n';
    }
    return out;
}

inline JsonValue tableToJson(const RejectionTable& t) {
    JsonValue rows = JsonValue::makeArray();
    for (const RejectionRow& r : t.rows) {
        JsonValue row = JsonValue::makeObject();
        row.set("method", JsonValue::make(r.method));
        row.set("family", JsonValue::make(r.family));
        row.set("xi", JsonValue::make(r.xi));
        row.set("freq", JsonValue::make(r.freq));
        row.set("N", JsonValue::make(r.reps));
        row.set("n", JsonValue::make(r.n));
        row.set("alpha", JsonValue::make(r.alpha));
        row.set("cv_mode", JsonValue::make(r.cvMode));
        rows.push(std::move(row));
    }
    JsonValue out = JsonValue::makeObject();
    out.set("rows", std::move(rows));
    return out;
}

}  // namespace pcatest
