#pragma once

// Circuit execution in two backends.
//
// The Fock backend keeps a sparse map over configurations whose occupancy
// may differ from branch to branch. The qutrit backend holds a dense vector
// of length 3^M and applies each gate as its lifted qutrit unitary, which is
// the fixed-width simulation of the same circuit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qedsim/error.hpp"
#include "qedsim/gates.hpp"
#include "qedsim/qutrit.hpp"
#include "qedsim/state.hpp"

namespace qedsim {

struct Circuit {
    std::size_t mode_count = 0;
    /// Unnormalized initial terms; empty means all modes |0>.
    std::vector<std::pair<Configuration, Amplitude>> initial;
    std::vector<GateSpec> gates;

    friend bool operator==(const Circuit&, const Circuit&) = default;
};

enum class Backend { fock, qutrit };

inline std::string_view to_string(Backend b) { return b == Backend::fock ? "fock" : "qutrit"; }

struct SimOptions {
    double prune_threshold = kDefaultPruneThreshold;
    /// Fail when a non-creation gate meets omega on its targets in every branch.
    bool strict = false;
    /// 0: QED_SIM_THREADS if set, else hardware concurrency.
    unsigned threads = 0;
};

using Histogram = std::map<Configuration, std::uint64_t>;

struct RunResult {
    Backend backend = Backend::fock;
    SparseState final_state;
    std::optional<QutritVector> qutrit_state;
    Histogram histogram;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    double wall_time_ms = 0.0;
};

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QED_SIM_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// --- Static validation ------------------------------------------------------

/// First problem found in a circuit, with the offending gate index (or none
/// for header / initial-state problems).
struct ValidationIssue {
    std::optional<std::size_t> gate_index;
    std::string message;
};

inline std::vector<std::pair<Configuration, Amplitude>> initial_terms(const Circuit& c) {
    if (!c.initial.empty()) return c.initial;
    return {{Configuration::zeros(c.mode_count), Amplitude(1.0)}};
}

inline std::optional<ValidationIssue> find_validation_issue(const Circuit& c) {
    if (c.mode_count == 0) return ValidationIssue{std::nullopt, "circuit must declare at least one mode"};
    const auto init = initial_terms(c);
    for (const auto& [config, amp] : init)
        if (config.size() != c.mode_count)
            return ValidationIssue{std::nullopt, "initial ket " + config.to_string() + " has " +
                                                     std::to_string(config.size()) + " modes, expected " +
                                                     std::to_string(c.mode_count)};

    // Modes touched by an earlier gate, or occupied in some initial branch,
    // cannot be creation targets.
    std::vector<bool> dirty(c.mode_count, false);
    for (const auto& [config, amp] : init)
        for (std::size_t m = 0; m < c.mode_count; ++m)
            if (is_occupied(config[m])) dirty[m] = true;

    for (std::size_t i = 0; i < c.gates.size(); ++i) {
        const GateSpec& g = c.gates[i];
        for (std::size_t m : g.modes)
            if (m >= c.mode_count)
                return ValidationIssue{i, "mode " + std::to_string(m) + " out of range (circuit has " +
                                              std::to_string(c.mode_count) + " modes)"};
        if (std::set<std::size_t>(g.modes.begin(), g.modes.end()).size() != g.modes.size())
            return ValidationIssue{i, "gate modes must be distinct"};

        const auto rows = g.matrix.rows(), cols = g.matrix.cols();
        switch (g.kind) {
        case GateKind::single:
            if (g.modes.size() != 1 || rows != 2 || cols != 2)
                return ValidationIssue{i, "single-mode gate needs a 2x2 matrix and one mode"};
            break;
        case GateKind::two:
            if (g.modes.size() != 2 || rows != 4 || cols != 4)
                return ValidationIssue{i, "two-mode gate needs a 4x4 matrix and two modes"};
            break;
        case GateKind::suppressed:
            if (rows != cols || (Eigen::Index{1} << g.modes.size()) != rows)
                return ValidationIssue{i, "suppressed gate matrix does not match its " +
                                              std::to_string(g.modes.size()) + " modes"};
            break;
        case GateKind::create:
            if (g.modes.size() != 4 || rows != 16 || cols != 4)
                return ValidationIssue{i, "creation gate needs a 16x4 matrix, two sources and two targets"};
            for (std::size_t k = 2; k < 4; ++k)
                if (dirty[g.modes[k]])
                    return ValidationIssue{i, "creation target mode " + std::to_string(g.modes[k]) +
                                                  " may already be occupied"};
            break;
        }
        if (g.kind == GateKind::create ? !is_isometry(g.matrix) : !is_unitary(g.matrix))
            return ValidationIssue{i, "gate " + g.name + " is not " +
                                          (g.kind == GateKind::create ? "an isometry" : "unitary")};
        for (std::size_t m : g.modes) dirty[m] = true;
    }
    return std::nullopt;
}

inline void validate(const Circuit& c) {
    if (auto issue = find_validation_issue(c)) {
        std::string where = issue->gate_index ? "gate " + std::to_string(*issue->gate_index) + ": " : "";
        throw Error(ErrorKind::StaticValidation, where + issue->message);
    }
}

inline SparseState initial_state(const Circuit& c, double threshold = kDefaultPruneThreshold) {
    return make_state(c.mode_count, initial_terms(c), threshold);
}

/// Occupied modes in the fullest initial branch plus two per creation gate.
inline std::size_t particle_growth_bound(const Circuit& c) {
    std::size_t occupied = 0;
    for (const auto& [config, amp] : initial_terms(c)) occupied = std::max(occupied, config.occupied_count());
    for (const GateSpec& g : c.gates)
        if (g.kind == GateKind::create) occupied += 2;
    return occupied;
}

// --- Fock backend -----------------------------------------------------------

inline SparseState apply_gate(const SparseState& state, const GateSpec& g, const SimOptions& opts = {}) {
    SparseState::Terms out;
    const std::size_t k = g.modes.size();

    if (g.kind == GateKind::create) {
        const std::size_t s0 = g.modes[0], s1 = g.modes[1], t0 = g.modes[2], t1 = g.modes[3];
        for (const auto& [config, amp] : state.terms()) {
            if (!is_occupied(config[s0]) || !is_occupied(config[s1]))
                throw Error(ErrorKind::CreationOnVacuum, "source mode of create is omega in branch " +
                                                             config.to_string());
            if (is_occupied(config[t0]) || is_occupied(config[t1]))
                throw Error(ErrorKind::CreationCollision, "target mode of create is occupied in branch " +
                                                              config.to_string());
            const int col = 2 * static_cast<int>(config[s0]) + static_cast<int>(config[s1]);
            Configuration next = config;
            for (int row = 0; row < 16; ++row) {
                const Complex coef = g.matrix(row, col);
                if (coef == Complex{}) continue;
                next[s0] = static_cast<Trit>((row >> 3) & 1);
                next[s1] = static_cast<Trit>((row >> 2) & 1);
                next[t0] = static_cast<Trit>((row >> 1) & 1);
                next[t1] = static_cast<Trit>(row & 1);
                out[next] += coef * amp;
            }
        }
    } else {
        const Eigen::Index dim = Eigen::Index{1} << k;
        bool touched = false;
        for (const auto& [config, amp] : state.terms()) {
            Eigen::Index col = 0;
            bool occupied = true;
            for (std::size_t j = 0; j < k; ++j) {
                const Trit t = config[g.modes[j]];
                if (!is_occupied(t)) {
                    occupied = false;
                    break;
                }
                col = col * 2 + static_cast<Eigen::Index>(t);
            }
            if (!occupied) {
                out[config] += amp;
                continue;
            }
            touched = true;
            Configuration next = config;
            for (Eigen::Index row = 0; row < dim; ++row) {
                const Complex coef = g.matrix(row, col);
                if (coef == Complex{}) continue;
                for (std::size_t j = 0; j < k; ++j)
                    next[g.modes[j]] = static_cast<Trit>((row >> (k - 1 - j)) & 1);
                out[next] += coef * amp;
            }
        }
        if (opts.strict && !touched)
            throw Error(ErrorKind::StrictOmega, "gate " + g.name + " acts only on omega branches");
    }
    std::vector<std::pair<Configuration, Amplitude>> terms(out.begin(), out.end());
    return make_state(state.mode_count(), terms, state.prune_threshold());
}

inline SparseState simulate_fock(const Circuit& c, const SimOptions& opts = {}) {
    validate(c);
    SparseState state = initial_state(c, opts.prune_threshold);
    for (const GateSpec& g : c.gates) state = apply_gate(state, g, opts);
    return state;
}

// --- Qutrit backend ---------------------------------------------------------

/// Applies a dense 3^k x 3^k operator to the listed modes of a qutrit vector.
inline void apply_lifted(QutritVector& v, const Matrix& op, const std::vector<std::size_t>& targets,
                         unsigned threads = 1) {
    const std::size_t modes = v.mode_count;
    const std::size_t k = targets.size();
    const std::size_t local = qutrit_dimension(k);

    std::vector<std::size_t> stride(modes);
    for (std::size_t i = 0; i < modes; ++i) stride[i] = qutrit_dimension(modes - 1 - i);

    std::vector<std::size_t> offset(local, 0);
    for (std::size_t l = 0; l < local; ++l) {
        std::size_t rest = l;
        for (std::size_t j = k; j-- > 0;) {
            offset[l] += (rest % 3) * stride[targets[j]];
            rest /= 3;
        }
    }
    std::vector<std::size_t> spectator_stride;
    for (std::size_t i = 0; i < modes; ++i)
        if (std::find(targets.begin(), targets.end(), i) == targets.end()) spectator_stride.push_back(stride[i]);
    const std::size_t groups = qutrit_dimension(spectator_stride.size());

    auto work = [&](std::size_t begin, std::size_t end) {
        Eigen::VectorXcd in(static_cast<Eigen::Index>(local));
        Eigen::VectorXcd res(static_cast<Eigen::Index>(local));
        for (std::size_t g = begin; g < end; ++g) {
            std::size_t base = 0, rest = g;
            for (std::size_t j = spectator_stride.size(); j-- > 0;) {
                base += (rest % 3) * spectator_stride[j];
                rest /= 3;
            }
            bool any = false;
            for (std::size_t l = 0; l < local; ++l) {
                in(static_cast<Eigen::Index>(l)) = v.entries[base + offset[l]];
                any = any || in(static_cast<Eigen::Index>(l)) != Complex{};
            }
            if (!any) continue;
            res.noalias() = op * in;
            for (std::size_t l = 0; l < local; ++l) v.entries[base + offset[l]] = res(static_cast<Eigen::Index>(l));
        }
    };

    const std::size_t cost = groups * local * local;
    if (threads <= 1 || cost < (std::size_t{1} << 18)) {
        work(0, groups);
        return;
    }
    const std::size_t n = std::min<std::size_t>(threads, groups);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t)
        pool.emplace_back(work, groups * t / n, groups * (t + 1) / n);
    for (auto& th : pool) th.join();
}

inline QutritVector simulate_qutrit(const Circuit& c, const SimOptions& opts = {}) {
    guard_qutrit_modes(c.mode_count);
    validate(c);
    QutritVector v = embed(initial_state(c, opts.prune_threshold));
    const unsigned threads = resolve_threads(opts.threads);
    for (const GateSpec& g : c.gates) apply_lifted(v, lift_to_qutrit(g), g.modes, threads);
    const double norm = v.norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-9)
        throw Error(ErrorKind::NonFinite, "qutrit state norm drifted to " + std::to_string(norm));
    return v;
}

// --- Measurement ------------------------------------------------------------

/// Computational-basis samples drawn with probability |amplitude|^2.
inline Histogram sample(const SparseState& s, std::uint64_t shots, std::uint64_t seed) {
    Histogram hist;
    if (shots == 0) return hist;
    std::vector<const Configuration*> keys;
    std::vector<double> cumulative;
    double total = 0.0;
    for (const auto& [c, a] : s.terms()) {
        total += std::norm(a);
        keys.push_back(&c);
        cumulative.push_back(total);
    }
    std::mt19937_64 rng(seed);
    for (std::uint64_t shot = 0; shot < shots; ++shot) {
        const double u = static_cast<double>(rng() >> 11) * 0x1p-53 * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        ++hist[*keys[static_cast<std::size_t>(it - cumulative.begin())]];
    }
    return hist;
}

inline RunResult run(const Circuit& c, Backend backend, std::uint64_t shots = 0, std::uint64_t seed = 0,
                     const SimOptions& opts = {}) {
    const auto start = std::chrono::steady_clock::now();
    std::optional<QutritVector> dense;
    std::optional<SparseState> state;
    if (backend == Backend::fock) {
        state = simulate_fock(c, opts);
    } else {
        dense = simulate_qutrit(c, opts);
        state = extract(*dense, opts.prune_threshold);
    }
    Histogram hist = sample(*state, shots, seed);
    const auto stop = std::chrono::steady_clock::now();
    return RunResult{backend,
                     std::move(*state),
                     std::move(dense),
                     std::move(hist),
                     shots,
                     seed,
                     std::chrono::duration<double, std::milli>(stop - start).count()};
}

} // namespace qedsim
