#pragma once

// Backend equivalence: the Fock result, embedded into qutrit space, must equal
// the qutrit backend's vector entry by entry.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <future>
#include <string>
#include <vector>

#include "qedsim/circuit_io.hpp"
#include "qedsim/engine.hpp"
#include "qedsim/qutrit.hpp"

namespace qedsim {

inline constexpr double kDefaultEquivalenceTolerance = 1e-10;

struct EquivalenceReport {
    double max_abs_diff = 0.0;
    /// Diagnostic only: difference after aligning global phase on the
    /// largest-magnitude qutrit entry.
    double phase_aligned_diff = 0.0;
    bool pass = false;
    std::string circuit_hash;
    std::vector<std::uint64_t> seeds;
};

/// FNV-1a over the canonical circuit text, as 16 hex digits.
inline std::string circuit_hash(const Circuit& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : format_circuit(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline double max_abs_diff(const QutritVector& a, const QutritVector& b) {
    if (a.mode_count != b.mode_count || a.entries.size() != b.entries.size())
        throw Error(ErrorKind::LengthMismatch, "qutrit vectors of different width");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.entries.size(); ++i) worst = std::max(worst, std::abs(a.entries[i] - b.entries[i]));
    return worst;
}

inline double phase_aligned_diff(const QutritVector& fock, const QutritVector& qutrit) {
    std::size_t pivot = 0;
    for (std::size_t i = 1; i < qutrit.entries.size(); ++i)
        if (std::abs(qutrit.entries[i]) > std::abs(qutrit.entries[pivot])) pivot = i;
    Amplitude phase(1.0);
    if (std::abs(fock.entries[pivot]) > 0 && std::abs(qutrit.entries[pivot]) > 0) {
        const Amplitude ratio = qutrit.entries[pivot] / fock.entries[pivot];
        phase = ratio / std::abs(ratio);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < fock.entries.size(); ++i)
        worst = std::max(worst, std::abs(fock.entries[i] * phase - qutrit.entries[i]));
    return worst;
}

inline EquivalenceReport check_equivalence(const Circuit& c, double tol = kDefaultEquivalenceTolerance,
                                           std::vector<std::uint64_t> seeds = {}, const SimOptions& opts = {}) {
    guard_qutrit_modes(c.mode_count);
    validate(c);
    QutritVector fock;
    QutritVector qutrit;
    if (resolve_threads(opts.threads) > 1) {
        auto pending = std::async(std::launch::async, [&] { return simulate_qutrit(c, opts); });
        fock = embed(simulate_fock(c, opts));
        qutrit = pending.get();
    } else {
        fock = embed(simulate_fock(c, opts));
        qutrit = simulate_qutrit(c, opts);
    }
    EquivalenceReport report;
    report.max_abs_diff = max_abs_diff(fock, qutrit);
    report.phase_aligned_diff = phase_aligned_diff(fock, qutrit);
    report.pass = report.max_abs_diff <= tol;
    report.circuit_hash = circuit_hash(c);
    report.seeds = std::move(seeds);
    return report;
}

inline json report_to_json(const EquivalenceReport& r) {
    return json{{"max_abs_diff", r.max_abs_diff},
                {"phase_aligned_diff", r.phase_aligned_diff},
                {"pass", r.pass},
                {"circuit_hash", r.circuit_hash},
                {"seeds", r.seeds}};
}

} // namespace qedsim
