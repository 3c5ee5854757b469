#pragma once

// Text formats: the line-oriented .qed circuit language, gate matrices as
// JSON (nested rows of [re, im] pairs), and run results as JSON or CSV.
//
//   modes 4
//   init 00WW                       # or: init 0.5*0W + -0.5*1W + 0.5+0.1i*00
//   defgate G matrix [[[1,0],[0,0]],[[0,0],[1,0]]]
//   apply H 0
//   apply CNOT 0 1
//   create default from 0 1 into 2 3
//   suppressed G on 0 budget 1
//
// 'W' spells omega in ket strings; the UTF-8 'Ω' is accepted on input.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qedsim/engine.hpp"
#include "qedsim/error.hpp"
#include "qedsim/gates.hpp"
#include "qedsim/state.hpp"

namespace qedsim {

using json = nlohmann::json;

// --- Numbers ----------------------------------------------------------------

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

/// JSON value for a double: integral magnitudes below 2^53 become integers.
inline json json_number(double value) {
    if (std::isfinite(value) && value == std::trunc(value) && std::abs(value) < 0x1p53)
        return static_cast<std::int64_t>(value);
    return value;
}

// --- Matrix JSON ------------------------------------------------------------

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(json::array({json_number(m(i, j).real()), json_number(m(i, j).imag())}));
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Compact single-line form used inside .qed files.
inline std::string matrix_to_inline(const Matrix& m) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out += i ? ",[" : "[";
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out += j ? ",[" : "[";
            out += format_double(m(i, j).real()) + "," + format_double(m(i, j).imag()) + "]";
        }
        out += "]";
    }
    return out + "]";
}

/// Accepts nested rows whose entries are [re, im] pairs or plain numbers.
inline Matrix matrix_from_json(const json& j) {
    auto fail = [](const std::string& what) -> Matrix {
        throw Error(ErrorKind::ValidationError, "matrix JSON: " + what);
    };
    if (!j.is_array() || j.empty()) return fail("expected a non-empty array of rows");
    const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
    if (cols == 0) return fail("rows must be non-empty arrays");
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        const json& row = j[r];
        if (!row.is_array() || row.size() != cols) return fail("row " + std::to_string(r) + " has the wrong length");
        for (std::size_t c = 0; c < cols; ++c) {
            const json& e = row[c];
            Complex value;
            if (e.is_number()) {
                value = e.get<double>();
            } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
                value = Complex(e[0].get<double>(), e[1].get<double>());
            } else {
                return fail("entry (" + std::to_string(r) + ", " + std::to_string(c) + ") is not [re, im]");
            }
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = value;
        }
    }
    return m;
}

// --- Parser -----------------------------------------------------------------

namespace detail {

inline std::size_t column_of(std::string_view line, std::size_t byte) {
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < line.size(); ++i)
        if ((static_cast<unsigned char>(line[i]) & 0xC0) != 0x80) ++col;
    return col;
}

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
    if (!alpha(s[0])) return false;
    for (char c : s)
        if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
    return true;
}

class LineParser {
public:
    LineParser(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

    [[noreturn]] void fail(ErrorKind kind, std::size_t byte, const std::string& message) const {
        throw ParseError(kind, line_no_, column_of(line_, byte), message);
    }

    void skip_space() {
        while (pos_ < line_.size() && is_space(line_[pos_])) ++pos_;
    }

    bool at_end() {
        skip_space();
        return pos_ >= line_.size();
    }

    std::size_t pos() const { return pos_; }
    void seek(std::size_t p) { pos_ = p; }
    std::string_view rest() const { return line_.substr(pos_); }
    char peek() const { return pos_ < line_.size() ? line_[pos_] : '\0'; }
    void advance(std::size_t n = 1) { pos_ += n; }

    /// Next whitespace-delimited word and its byte offset.
    std::pair<std::string_view, std::size_t> word() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < line_.size() && !is_space(line_[pos_])) ++pos_;
        return {line_.substr(start, pos_ - start), start};
    }

    void expect_keyword(std::string_view keyword) {
        auto [w, at] = word();
        if (w != keyword)
            fail(ErrorKind::SyntaxError, at,
                 "expected '" + std::string(keyword) + "'" + (w.empty() ? "" : ", found '" + std::string(w) + "'"));
    }

    std::pair<std::size_t, std::size_t> integer(std::string_view what) {
        auto [w, at] = word();
        if (w.empty()) fail(ErrorKind::SyntaxError, at, "expected " + std::string(what));
        std::size_t value = 0;
        auto [end, ec] = std::from_chars(w.data(), w.data() + w.size(), value);
        if (ec != std::errc{} || end != w.data() + w.size())
            fail(ErrorKind::SyntaxError, at, "expected " + std::string(what) + ", found '" + std::string(w) + "'");
        return {value, at};
    }

    std::optional<double> number() {
        skip_space();
        const char* first = line_.data() + pos_;
        const char* last = line_.data() + line_.size();
        if (first < last && *first == '+') return std::nullopt;
        double value = 0.0;
        auto [end, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || !std::isfinite(value)) return std::nullopt;
        pos_ += static_cast<std::size_t>(end - first);
        return value;
    }

private:
    std::string_view line_;
    std::size_t line_no_;
    std::size_t pos_ = 0;
};

struct NamedMatrix {
    Matrix matrix;
    bool builtin = false;
};

} // namespace detail

/// Parses a .qed document into a validated circuit.
inline Circuit parse_circuit(std::string_view text) {
    Circuit circuit;
    bool have_modes = false;
    bool have_init = false;
    std::map<std::string, Matrix, std::less<>> defined;
    std::vector<bool> dirty;  // creation-freshness bookkeeping
    std::vector<std::size_t> gate_lines;

    auto lookup = [&](std::string_view name) -> std::optional<Matrix> {
        if (auto it = defined.find(name); it != defined.end()) return it->second;
        return builtin::lookup(name);
    };

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

        detail::LineParser p(line, line_no);
        if (p.at_end()) {
            if (end == text.size()) break;
            continue;
        }
        auto [keyword, kw_at] = p.word();

        if (!have_modes && keyword != "modes")
            p.fail(ErrorKind::SyntaxError, kw_at, "expected 'modes' header before '" + std::string(keyword) + "'");

        auto read_mode = [&](std::string_view what) {
            auto [mode, at] = p.integer(what);
            if (mode >= circuit.mode_count)
                p.fail(ErrorKind::ValidationError, at,
                       "mode " + std::to_string(mode) + " out of range (circuit has " +
                           std::to_string(circuit.mode_count) + " modes)");
            return std::pair{mode, at};
        };
        auto check_distinct = [&](const std::vector<std::pair<std::size_t, std::size_t>>& modes) {
            std::set<std::size_t> seen;
            for (auto [m, at] : modes)
                if (!seen.insert(m).second)
                    p.fail(ErrorKind::ValidationError, at, "mode " + std::to_string(m) + " repeated within a gate");
        };
        auto finish = [&] {
            if (!p.at_end()) p.fail(ErrorKind::SyntaxError, p.pos(), "unexpected '" + std::string(p.rest()) + "'");
        };
        auto add_gate = [&](GateSpec g) {
            for (std::size_t m : g.modes) dirty[m] = true;
            circuit.gates.push_back(std::move(g));
            gate_lines.push_back(line_no);
        };

        if (keyword == "modes") {
            if (have_modes) p.fail(ErrorKind::SyntaxError, kw_at, "duplicate 'modes' header");
            auto [m, at] = p.integer("mode count");
            if (m == 0) p.fail(ErrorKind::ValidationError, at, "mode count must be positive");
            finish();
            circuit.mode_count = m;
            have_modes = true;
            dirty.assign(m, true);  // default init: all modes |0>
        } else if (keyword == "init") {
            if (have_init) p.fail(ErrorKind::SyntaxError, kw_at, "duplicate 'init' line");
            if (!circuit.gates.empty()) p.fail(ErrorKind::SyntaxError, kw_at, "'init' must precede gates");
            have_init = true;
            auto read_ket = [&] {
                p.skip_space();
                const std::size_t at = p.pos();
                while (p.pos() < line.size() && !detail::is_space(p.peek()) && p.peek() != '+') p.advance();
                std::string_view token = line.substr(at, p.pos() - at);
                auto config = Configuration::from_string(token);
                if (!config)
                    p.fail(ErrorKind::SyntaxError, at,
                           token.empty() ? "expected ket string" : "invalid ket string '" + std::string(token) + "'");
                if (config->size() != circuit.mode_count)
                    p.fail(ErrorKind::ValidationError, at,
                           "ket '" + std::string(token) + "' has " + std::to_string(config->size()) +
                               " modes, expected " + std::to_string(circuit.mode_count));
                return *config;
            };
            if (p.rest().find('*') == std::string_view::npos) {
                circuit.initial.emplace_back(read_ket(), Amplitude(1.0));
            } else {
                while (true) {
                    p.skip_space();
                    const std::size_t term_at = p.pos();
                    auto re = p.number();
                    if (!re) p.fail(ErrorKind::SyntaxError, term_at, "expected coefficient");
                    double im = 0.0;
                    const std::size_t after_real = p.pos();
                    p.skip_space();
                    if (p.peek() == '+' || p.peek() == '-') {
                        const double sign = p.peek() == '-' ? -1.0 : 1.0;
                        p.advance();
                        auto imag = p.number();
                        p.skip_space();
                        if (imag && p.peek() == 'i') {
                            p.advance();
                            im = sign * *imag;
                        } else {
                            p.seek(after_real);
                        }
                    } else {
                        p.seek(after_real);
                    }
                    p.skip_space();
                    if (p.peek() != '*') p.fail(ErrorKind::SyntaxError, p.pos(), "expected '*' after coefficient");
                    p.advance();
                    Configuration config = read_ket();
                    circuit.initial.emplace_back(std::move(config), Amplitude(*re, im));
                    if (p.at_end()) break;
                    if (p.peek() != '+') p.fail(ErrorKind::SyntaxError, p.pos(), "expected '+' between terms");
                    p.advance();
                }
            }
            finish();
            double weight = 0.0;
            for (const auto& [c, a] : circuit.initial) weight += std::norm(a);
            if (!(weight > 0.0)) p.fail(ErrorKind::ValidationError, kw_at, "initial state has zero norm");
            dirty.assign(circuit.mode_count, false);
            for (const auto& [c, a] : circuit.initial)
                for (std::size_t m = 0; m < c.size(); ++m)
                    if (is_occupied(c[m])) dirty[m] = true;
        } else if (keyword == "defgate") {
            auto [name, name_at] = p.word();
            if (!detail::is_identifier(name))
                p.fail(ErrorKind::SyntaxError, name_at, "expected gate name");
            if (builtin::is_builtin(name) || name == "default")
                p.fail(ErrorKind::ValidationError, name_at, "'" + std::string(name) + "' is a built-in gate");
            if (defined.count(name))
                p.fail(ErrorKind::ValidationError, name_at, "gate '" + std::string(name) + "' already defined");
            p.expect_keyword("matrix");
            p.skip_space();
            const std::size_t json_at = p.pos();
            if (p.at_end()) p.fail(ErrorKind::SyntaxError, json_at, "expected matrix JSON");
            json j;
            try {
                j = json::parse(p.rest());
            } catch (const json::parse_error& e) {
                const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
                p.fail(ErrorKind::SyntaxError, json_at + byte, "malformed matrix JSON");
            }
            Matrix m;
            try {
                m = matrix_from_json(j);
            } catch (const Error& e) {
                p.fail(ErrorKind::ValidationError, json_at, e.what());
            }
            const bool square_pow2 = m.rows() == m.cols() && detail::log2_exact(m.rows()).has_value() && m.rows() >= 2;
            if (m.rows() == 16 && m.cols() == 4) {
                if (!is_isometry(m)) p.fail(ErrorKind::ValidationError, json_at, "16x4 matrix is not an isometry");
            } else if (square_pow2) {
                if (m.rows() > (1 << kMaxSuppressedQubits))
                    p.fail(ErrorKind::ValidationError, json_at, "matrix larger than 64x64");
                if (!is_unitary(m)) p.fail(ErrorKind::ValidationError, json_at, "matrix is not unitary");
            } else {
                p.fail(ErrorKind::ValidationError, json_at,
                       "matrix shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                           " is not 2^n x 2^n or 16x4");
            }
            defined.emplace(std::string(name), std::move(m));
        } else if (keyword == "apply") {
            auto [name, name_at] = p.word();
            if (name.empty()) p.fail(ErrorKind::SyntaxError, name_at, "expected gate name");
            auto m = lookup(name);
            if (!m) p.fail(ErrorKind::UnknownGate, name_at, "unknown gate '" + std::string(name) + "'");
            std::vector<std::pair<std::size_t, std::size_t>> modes;
            while (!p.at_end()) modes.push_back(read_mode("mode index"));
            if (modes.empty()) p.fail(ErrorKind::SyntaxError, p.pos(), "expected mode index");
            const bool single = m->rows() == 2 && m->cols() == 2;
            const bool two = m->rows() == 4 && m->cols() == 4;
            if (!single && !two)
                p.fail(ErrorKind::ValidationError, name_at,
                       "'apply' takes 2x2 or 4x4 gates; use 'suppressed' or 'create' for '" + std::string(name) + "'");
            const std::size_t want = single ? 1 : 2;
            if (modes.size() != want)
                p.fail(ErrorKind::ValidationError, modes.front().second,
                       "gate '" + std::string(name) + "' acts on " + std::to_string(want) + " mode(s), " +
                           std::to_string(modes.size()) + " given");
            check_distinct(modes);
            add_gate(single ? GateSpec{GateKind::single, std::string(name), *m, {modes[0].first}, 0}
                            : GateSpec{GateKind::two, std::string(name), *m, {modes[0].first, modes[1].first}, 0});
        } else if (keyword == "create") {
            auto [name, name_at] = p.word();
            if (name.empty()) p.fail(ErrorKind::SyntaxError, name_at, "expected 'default' or gate name");
            Matrix v;
            if (name == "default") {
                v = default_creation().matrix();
            } else {
                auto m = lookup(name);
                if (!m) p.fail(ErrorKind::UnknownGate, name_at, "unknown gate '" + std::string(name) + "'");
                if (m->rows() != 16 || m->cols() != 4)
                    p.fail(ErrorKind::ValidationError, name_at, "creation gate '" + std::string(name) + "' is not 16x4");
                v = *m;
            }
            p.expect_keyword("from");
            auto s0 = read_mode("source mode");
            auto s1 = read_mode("source mode");
            p.expect_keyword("into");
            auto t0 = read_mode("target mode");
            auto t1 = read_mode("target mode");
            finish();
            check_distinct({s0, s1, t0, t1});
            for (auto [m, at] : {t0, t1})
                if (dirty[m])
                    p.fail(ErrorKind::ValidationError, at,
                           "creation target mode " + std::to_string(m) + " may already be occupied");
            add_gate(GateSpec{GateKind::create, std::string(name), v, {s0.first, s1.first, t0.first, t1.first}, 0});
        } else if (keyword == "suppressed") {
            auto [name, name_at] = p.word();
            if (name.empty()) p.fail(ErrorKind::SyntaxError, name_at, "expected gate name");
            auto m = lookup(name);
            if (!m) p.fail(ErrorKind::UnknownGate, name_at, "unknown gate '" + std::string(name) + "'");
            p.expect_keyword("on");
            std::vector<std::pair<std::size_t, std::size_t>> modes;
            while (true) {
                p.skip_space();
                if (p.rest().substr(0, 6) == "budget" || p.at_end()) break;
                modes.push_back(read_mode("mode index"));
            }
            if (modes.empty()) p.fail(ErrorKind::SyntaxError, p.pos(), "expected mode index");
            p.expect_keyword("budget");
            auto [budget, budget_at] = p.integer("budget");
            finish();
            check_distinct(modes);
            std::vector<std::size_t> mode_ids;
            for (auto [md, at] : modes) mode_ids.push_back(md);
            try {
                add_gate(make_suppressed(*m, mode_ids, static_cast<int>(budget), std::string(name)));
            } catch (const Error& e) {
                p.fail(ErrorKind::ValidationError, e.kind() == ErrorKind::BudgetExceeded ? budget_at : name_at,
                       e.what());
            }
        } else {
            p.fail(ErrorKind::SyntaxError, kw_at, "unknown statement '" + std::string(keyword) + "'");
        }
        if (end == text.size()) break;
    }
    if (!have_modes) throw ParseError(ErrorKind::SyntaxError, 1, 1, "missing 'modes' header");

    if (auto issue = find_validation_issue(circuit)) {
        const std::size_t line = issue->gate_index ? gate_lines[*issue->gate_index] : 1;
        throw ParseError(ErrorKind::ValidationError, line, 1, issue->message);
    }
    return circuit;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, path + ": no such file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Circuit load_circuit(const std::string& path) { return parse_circuit(read_text_file(path)); }

// --- Formatter --------------------------------------------------------------

inline std::string format_amplitude(Amplitude a) {
    std::string out = format_double(a.real());
    if (a.imag() != 0.0) {
        out += std::signbit(a.imag()) ? "-" : "+";
        out += format_double(std::abs(a.imag())) + "i";
    }
    return out;
}

/// Canonical text: header, init, defgate lines in order of first use, then
/// one gate per line.
inline std::string format_circuit(const Circuit& c) {
    std::ostringstream out;
    out << "modes " << c.mode_count << "\n";
    if (!c.initial.empty()) {
        out << "init ";
        if (c.initial.size() == 1 && c.initial.front().second == Amplitude(1.0)) {
            out << c.initial.front().first.to_string();
        } else {
            for (std::size_t i = 0; i < c.initial.size(); ++i)
                out << (i ? " + " : "") << format_amplitude(c.initial[i].second) << "*"
                    << c.initial[i].first.to_string();
        }
        out << "\n";
    }

    // Names a reparse would resolve to the same matrix; anything else gets a
    // fresh defgate name.
    std::map<std::string, Matrix> emitted;
    std::vector<std::string> names;
    std::ostringstream defs;
    auto resolve = [&](const GateSpec& g) -> std::string {
        if (g.kind == GateKind::create && g.name == "default" && g.matrix == default_creation().matrix())
            return g.name;
        if (auto b = builtin::lookup(g.name); b && b->rows() == g.matrix.rows() && b->cols() == g.matrix.cols() &&
                                              *b == g.matrix)
            return g.name;
        std::string base = detail::is_identifier(g.name) && !builtin::is_builtin(g.name) && g.name != "default"
                               ? g.name
                               : "G";
        for (int suffix = 1;; ++suffix) {
            std::string candidate = suffix == 1 ? base : base + "_" + std::to_string(suffix);
            if (builtin::is_builtin(candidate)) continue;
            auto it = emitted.find(candidate);
            if (it == emitted.end()) {
                emitted.emplace(candidate, g.matrix);
                defs << "defgate " << candidate << " matrix " << matrix_to_inline(g.matrix) << "\n";
                return candidate;
            }
            if (it->second.rows() == g.matrix.rows() && it->second.cols() == g.matrix.cols() &&
                it->second == g.matrix)
                return candidate;
        }
    };
    for (const GateSpec& g : c.gates) names.push_back(resolve(g));
    out << defs.str();

    for (std::size_t i = 0; i < c.gates.size(); ++i) {
        const GateSpec& g = c.gates[i];
        switch (g.kind) {
        case GateKind::single:
        case GateKind::two:
            out << "apply " << names[i];
            for (std::size_t m : g.modes) out << " " << m;
            break;
        case GateKind::create:
            out << "create " << names[i] << " from " << g.modes[0] << " " << g.modes[1] << " into " << g.modes[2]
                << " " << g.modes[3];
            break;
        case GateKind::suppressed:
            out << "suppressed " << names[i] << " on";
            for (std::size_t m : g.modes) out << " " << m;
            out << " budget " << g.budget;
            break;
        }
        out << "\n";
    }
    return out.str();
}

// --- Results ----------------------------------------------------------------

enum class OutputFormat { json, csv };

inline json amplitudes_to_json(const SparseState& s) {
    json amps = json::object();
    for (const auto& [c, a] : s.terms())
        amps[c.to_string()] = json::array({json_number(a.real()), json_number(a.imag())});
    return amps;
}

inline json result_to_json(const RunResult& r) {
    json hist = json::object();
    for (const auto& [c, n] : r.histogram) hist[c.to_string()] = n;
    return json{{"backend", std::string(to_string(r.backend))},
                {"seed", r.seed},
                {"shots", r.shots},
                {"histogram", std::move(hist)},
                {"amplitudes", amplitudes_to_json(r.final_state)},
                {"wall_time_ms", r.wall_time_ms}};
}

/// Decimal for CSV cells; always carries a fractional part ("1.0").
inline std::string format_probability(double p) {
    std::string s = format_double(p);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

inline std::string write_result(const RunResult& r, OutputFormat fmt) {
    if (fmt == OutputFormat::json) return result_to_json(r).dump(2) + "\n";
    std::string out = "outcome,count,probability\n";
    for (const auto& [c, n] : r.histogram) {
        const double p = r.shots ? static_cast<double>(n) / static_cast<double>(r.shots) : 0.0;
        out += c.to_string() + "," + std::to_string(n) + "," + format_probability(p) + "\n";
    }
    return out;
}

} // namespace qedsim
