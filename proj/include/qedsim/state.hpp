#pragma once

// Configurations and sparse states over a variable number of occupied modes.
//
// A mode is one photon slot. Its label is a trit: zero and one are the
// polarization qubit, omega marks the slot as unoccupied. A configuration
// assigns a trit to each of the M modes of a circuit; a SparseState maps
// configurations to amplitudes and so can hold branches with different
// particle numbers at once.

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qedsim/error.hpp"

namespace qedsim {

using Amplitude = std::complex<double>;

inline constexpr double kDefaultPruneThreshold = 1e-12;

// Declaration order fixes the canonical ordering zero < one < omega and the
// qutrit digit of each label.
enum class Trit : std::uint8_t { zero = 0, one = 1, omega = 2 };

inline char to_char(Trit t) {
    switch (t) {
    case Trit::zero: return '0';
    case Trit::one: return '1';
    case Trit::omega: return 'W';
    }
    return '?';
}

inline bool is_occupied(Trit t) { return t != Trit::omega; }

class Configuration {
public:
    Configuration() = default;
    explicit Configuration(std::vector<Trit> trits) : trits_(std::move(trits)) {}
    Configuration(std::initializer_list<Trit> trits) : trits_(trits) {}

    /// Parses a ket string such as "00WW". Accepts 0, 1, W and the UTF-8 Ω.
    static std::optional<Configuration> from_string(std::string_view text) {
        std::vector<Trit> trits;
        for (std::size_t i = 0; i < text.size(); ++i) {
            const char c = text[i];
            if (c == '0') {
                trits.push_back(Trit::zero);
            } else if (c == '1') {
                trits.push_back(Trit::one);
            } else if (c == 'W') {
                trits.push_back(Trit::omega);
            } else if (static_cast<unsigned char>(c) == 0xCE && i + 1 < text.size() &&
                       static_cast<unsigned char>(text[i + 1]) == 0xA9) {
                trits.push_back(Trit::omega);
                ++i;
            } else {
                return std::nullopt;
            }
        }
        if (trits.empty()) return std::nullopt;
        return Configuration(std::move(trits));
    }

    /// All-zero configuration on the given number of modes.
    static Configuration zeros(std::size_t modes) {
        return Configuration(std::vector<Trit>(modes, Trit::zero));
    }

    std::size_t size() const noexcept { return trits_.size(); }
    Trit operator[](std::size_t mode) const { return trits_[mode]; }
    Trit& operator[](std::size_t mode) { return trits_[mode]; }
    const std::vector<Trit>& trits() const noexcept { return trits_; }

    std::size_t occupied_count() const {
        std::size_t n = 0;
        for (Trit t : trits_) n += is_occupied(t) ? 1 : 0;
        return n;
    }

    std::string to_string() const {
        std::string s;
        s.reserve(trits_.size());
        for (Trit t : trits_) s.push_back(to_char(t));
        return s;
    }

    friend bool operator==(const Configuration&, const Configuration&) = default;
    friend auto operator<=>(const Configuration&, const Configuration&) = default;

private:
    std::vector<Trit> trits_;
};

namespace detail {
struct StateAccess;
}

/// Immutable normalized superposition of configurations on a fixed mode count.
class SparseState {
public:
    using Terms = std::map<Configuration, Amplitude>;

    std::size_t mode_count() const noexcept { return mode_count_; }
    double prune_threshold() const noexcept { return prune_threshold_; }
    const Terms& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }

    Amplitude amplitude(const Configuration& c) const {
        auto it = terms_.find(c);
        return it == terms_.end() ? Amplitude{} : it->second;
    }

    double norm() const {
        double sum = 0.0;
        for (const auto& [c, a] : terms_) sum += std::norm(a);
        return std::sqrt(sum);
    }

    /// Same terms under a different threshold; call prune() to apply it.
    SparseState with_prune_threshold(double threshold) const {
        return SparseState(mode_count_, threshold, terms_);
    }

    friend bool operator==(const SparseState&, const SparseState&) = default;

private:
    friend struct detail::StateAccess;

    SparseState(std::size_t modes, double threshold, Terms terms)
        : mode_count_(modes), prune_threshold_(threshold), terms_(std::move(terms)) {}

    std::size_t mode_count_ = 0;
    double prune_threshold_ = kDefaultPruneThreshold;
    Terms terms_;
};

namespace detail {

struct StateAccess {
    static SparseState build(std::size_t modes, double threshold, SparseState::Terms terms) {
        return SparseState(modes, threshold, std::move(terms));
    }
};

// Drops terms below the threshold and rescales the rest to unit norm.
inline SparseState::Terms normalize_terms(SparseState::Terms terms, double threshold) {
    for (auto it = terms.begin(); it != terms.end();) {
        if (std::abs(it->second) < threshold)
            it = terms.erase(it);
        else
            ++it;
    }
    if (terms.empty()) throw Error(ErrorKind::EmptyState, "every amplitude is below the prune threshold");
    double sum = 0.0;
    for (const auto& [c, a] : terms) sum += std::norm(a);
    // Already-normalized input is kept verbatim.
    if (std::abs(sum - 1.0) <= 4 * std::numeric_limits<double>::epsilon()) return terms;
    const double scale = std::sqrt(1.0 / sum);
    if (!std::isfinite(scale) || scale == 0.0) throw Error(ErrorKind::NonFinite, "state norm is not finite");
    for (auto& [c, a] : terms) a *= scale;
    return terms;
}

} // namespace detail

/// Builds a normalized state from (configuration, amplitude) pairs. Repeated
/// configurations are summed.
template <class Range>
SparseState make_state(std::size_t modes, const Range& initial, double threshold = kDefaultPruneThreshold) {
    SparseState::Terms terms;
    for (const auto& [config, amp] : initial) {
        if (config.size() != modes)
            throw Error(ErrorKind::LengthMismatch, "configuration " + config.to_string() + " has " +
                                                       std::to_string(config.size()) + " modes, expected " +
                                                       std::to_string(modes));
        const Amplitude a(amp);
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
            throw Error(ErrorKind::NonFinite, "amplitude of " + config.to_string() + " is not finite");
        terms[config] += a;
    }
    return detail::StateAccess::build(modes, threshold, detail::normalize_terms(std::move(terms), threshold));
}

inline SparseState make_state(std::size_t modes, std::initializer_list<std::pair<Configuration, Amplitude>> initial,
                              double threshold = kDefaultPruneThreshold) {
    return make_state(modes, std::vector<std::pair<Configuration, Amplitude>>(initial), threshold);
}

/// Single basis ket with amplitude one.
inline SparseState basis_state(const Configuration& c, double threshold = kDefaultPruneThreshold) {
    return make_state(c.size(), std::vector<std::pair<Configuration, Amplitude>>{{c, 1.0}}, threshold);
}

inline SparseState prune(const SparseState& s) {
    return detail::StateAccess::build(s.mode_count(), s.prune_threshold(),
                                      detail::normalize_terms(s.terms(), s.prune_threshold()));
}

/// <a|b>, conjugate-linear in a.
inline Amplitude inner_product(const SparseState& a, const SparseState& b) {
    if (a.mode_count() != b.mode_count())
        throw Error(ErrorKind::LengthMismatch, "inner product of states on " + std::to_string(a.mode_count()) +
                                                   " and " + std::to_string(b.mode_count()) + " modes");
    const auto& small = a.size() <= b.size() ? a.terms() : b.terms();
    const auto& large = a.size() <= b.size() ? b.terms() : a.terms();
    const bool a_is_small = a.size() <= b.size();
    Amplitude sum{};
    for (const auto& [c, amp] : small) {
        auto it = large.find(c);
        if (it == large.end()) continue;
        sum += a_is_small ? std::conj(amp) * it->second : std::conj(it->second) * amp;
    }
    return sum;
}

/// Largest number of occupied modes over the support.
inline std::size_t max_occupied(const SparseState& s) {
    std::size_t best = 0;
    for (const auto& [c, a] : s.terms()) best = std::max(best, c.occupied_count());
    return best;
}

} // namespace qedsim
