#pragma once

// Fixed-width qutrit picture of a variable-occupancy state. Each mode becomes
// one qutrit with digit zero -> 0, one -> 1, omega -> 2; the basis index of a
// configuration is sum_i digit_i * 3^(M-1-i), so index order coincides with
// canonical configuration order.

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "qedsim/error.hpp"
#include "qedsim/state.hpp"

namespace qedsim {

/// 3^14 ~ 4.8M amplitudes.
inline constexpr std::size_t kMaxQutritModes = 14;

struct QutritVector {
    std::size_t mode_count = 0;
    std::vector<Amplitude> entries;

    double norm() const {
        double sum = 0.0;
        for (const auto& a : entries) sum += std::norm(a);
        return std::sqrt(sum);
    }

    friend bool operator==(const QutritVector&, const QutritVector&) = default;
};

inline void guard_qutrit_modes(std::size_t modes) {
    if (modes > kMaxQutritModes)
        throw Error(ErrorKind::DimensionGuard, "dense qutrit backend supports at most " +
                                                   std::to_string(kMaxQutritModes) + " modes, circuit has " +
                                                   std::to_string(modes));
}

inline std::size_t qutrit_dimension(std::size_t modes) {
    std::size_t dim = 1;
    for (std::size_t i = 0; i < modes; ++i) dim *= 3;
    return dim;
}

inline std::size_t qutrit_index(const Configuration& c) {
    std::size_t index = 0;
    for (Trit t : c.trits()) index = index * 3 + static_cast<std::size_t>(t);
    return index;
}

inline Configuration configuration_at(std::size_t index, std::size_t modes) {
    std::vector<Trit> trits(modes);
    for (std::size_t i = modes; i-- > 0;) {
        trits[i] = static_cast<Trit>(index % 3);
        index /= 3;
    }
    return Configuration(std::move(trits));
}

inline QutritVector embed(const SparseState& s) {
    guard_qutrit_modes(s.mode_count());
    QutritVector v{s.mode_count(), std::vector<Amplitude>(qutrit_dimension(s.mode_count()))};
    for (const auto& [c, a] : s.terms()) v.entries[qutrit_index(c)] = a;
    return v;
}

/// Inverse of embed; entries with magnitude below the threshold are dropped.
inline SparseState extract(const QutritVector& v, double threshold = kDefaultPruneThreshold) {
    std::vector<std::pair<Configuration, Amplitude>> terms;
    for (std::size_t i = 0; i < v.entries.size(); ++i)
        if (std::abs(v.entries[i]) >= threshold) terms.emplace_back(configuration_at(i, v.mode_count), v.entries[i]);
    return make_state(v.mode_count, terms, threshold);
}

} // namespace qedsim
