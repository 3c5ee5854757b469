#pragma once

// Gate set of the particle-creation circuit model.
//
//   single      2x2 unitary on one mode
//   two         4x4 unitary on two modes
//   create      16x4 isometry: two occupied source modes and two unoccupied
//               target modes in, four occupied modes out
//   suppressed  2^n x 2^n unitary with |Tr(I - U)| <= 2^-budget
//
// Every non-creation gate acts on the {zero, one} values of its target modes
// and leaves a configuration untouched when any target is omega.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qedsim/error.hpp"
#include "qedsim/state.hpp"

namespace qedsim {

using Matrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

inline constexpr double kUnitaryTolerance = 1e-10;
inline constexpr double kBudgetSlack = 1e-12;
/// sqrt(4 pi alpha) with alpha = 1/137.036.
inline constexpr double kDefaultCoupling = 0.302822;
inline constexpr std::size_t kMaxSuppressedQubits = 6;

/// max_ij |(M^dagger M - I)_ij|
inline double isometry_error(const Matrix& m) {
    const Matrix gram = m.adjoint() * m;
    return (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

inline bool is_isometry(const Matrix& m, double tol = kUnitaryTolerance) {
    return m.rows() >= m.cols() && m.cols() > 0 && isometry_error(m) <= tol;
}

inline bool is_unitary(const Matrix& m, double tol = kUnitaryTolerance) {
    return m.rows() == m.cols() && is_isometry(m, tol);
}

/// |Tr(I - U)|
inline double trace_deficit(const Matrix& u) {
    Complex sum{};
    for (Eigen::Index k = 0; k < u.rows(); ++k) sum += Complex(1.0) - u(k, k);
    return std::abs(sum);
}

namespace detail {

inline std::optional<std::size_t> log2_exact(Eigen::Index dim) {
    if (dim <= 0) return std::nullopt;
    std::size_t n = 0;
    while ((Eigen::Index{1} << n) < dim) ++n;
    if ((Eigen::Index{1} << n) != dim) return std::nullopt;
    return n;
}

inline std::size_t pow3(std::size_t k) {
    std::size_t p = 1;
    while (k-- > 0) p *= 3;
    return p;
}

inline void require_distinct(const std::vector<std::size_t>& modes) {
    std::set<std::size_t> seen(modes.begin(), modes.end());
    if (seen.size() != modes.size()) throw Error(ErrorKind::ValidationError, "gate mode indices must be distinct");
}

} // namespace detail

// --- Built-in gates ---------------------------------------------------------

namespace builtin {

inline Matrix identity() { return Matrix::Identity(2, 2); }

inline Matrix hadamard() {
    const double r = 1.0 / std::numbers::sqrt2;
    Matrix m(2, 2);
    m << r, r, r, -r;
    return m;
}

inline Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

inline Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

inline Matrix phase_s() {
    Matrix m(2, 2);
    m << 1, 0, 0, Complex(0, 1);
    return m;
}

inline Matrix phase_t() {
    Matrix m(2, 2);
    m << 1, 0, 0, std::polar(1.0, std::numbers::pi / 4);
    return m;
}

/// Control on the first listed mode.
inline Matrix cnot() {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
    return m;
}

inline Matrix cz() {
    Matrix m = Matrix::Identity(4, 4);
    m(3, 3) = -1;
    return m;
}

inline const std::vector<std::string>& names() {
    static const std::vector<std::string> table{"CNOT", "CZ", "H", "I", "S", "T", "X", "Y", "Z"};
    return table;
}

inline std::optional<Matrix> lookup(std::string_view name) {
    if (name == "H") return hadamard();
    if (name == "X") return pauli_x();
    if (name == "Y") return pauli_y();
    if (name == "Z") return pauli_z();
    if (name == "S") return phase_s();
    if (name == "T") return phase_t();
    if (name == "I") return identity();
    if (name == "CNOT") return cnot();
    if (name == "CZ") return cz();
    return std::nullopt;
}

inline bool is_builtin(std::string_view name) { return lookup(name).has_value(); }

} // namespace builtin

// --- Creation isometry ------------------------------------------------------

/// Validated 16x4 isometry. Column c = 2t + u is the image of input |t u>;
/// row r = 8p + 4q + 2r' + s is output |p q r' s>.
class CreationIsometry {
public:
    const Matrix& matrix() const noexcept { return v_; }

    friend bool operator==(const CreationIsometry& a, const CreationIsometry& b) { return a.v_ == b.v_; }
    friend CreationIsometry make_creation(const Matrix& v);

private:
    explicit CreationIsometry(Matrix v) : v_(std::move(v)) {}
    Matrix v_;
};

inline CreationIsometry make_creation(const Matrix& v) {
    if (v.rows() != 16 || v.cols() != 4)
        throw Error(ErrorKind::NotIsometry, "creation matrix must be 16x4, got " + std::to_string(v.rows()) + "x" +
                                                std::to_string(v.cols()));
    if (!is_isometry(v))
        throw Error(ErrorKind::NotIsometry, "V^dagger V deviates from I4 by " + std::to_string(isometry_error(v)));
    return CreationIsometry(v);
}

/// |tu> -> |tu>|tu>
inline CreationIsometry default_creation() {
    Matrix v = Matrix::Zero(16, 4);
    for (int t = 0; t < 2; ++t)
        for (int u = 0; u < 2; ++u) v(8 * t + 4 * u + 2 * t + u, 2 * t + u) = 1.0;
    return make_creation(v);
}

// --- Gate specification -----------------------------------------------------

enum class GateKind { single, two, create, suppressed };

inline std::string_view to_string(GateKind kind) {
    switch (kind) {
    case GateKind::single: return "single";
    case GateKind::two: return "two";
    case GateKind::create: return "create";
    case GateKind::suppressed: return "suppressed";
    }
    return "?";
}

/// One gate of a circuit. For create gates `modes` holds the two sources
/// followed by the two targets.
struct GateSpec {
    GateKind kind = GateKind::single;
    std::string name;
    Matrix matrix;
    std::vector<std::size_t> modes;
    int budget = 0;

    std::size_t arity() const noexcept { return modes.size(); }

    friend bool operator==(const GateSpec& a, const GateSpec& b) {
        return a.kind == b.kind && a.name == b.name && a.modes == b.modes && a.budget == b.budget &&
               a.matrix.rows() == b.matrix.rows() && a.matrix.cols() == b.matrix.cols() && a.matrix == b.matrix;
    }
};

inline GateSpec make_single(const Matrix& u, std::size_t mode, std::string name = "U1") {
    if (u.rows() != 2 || u.cols() != 2) throw Error(ErrorKind::BadDimension, "single-mode gate must be 2x2");
    if (!is_unitary(u)) throw Error(ErrorKind::NotUnitary, "gate " + name + " is not unitary");
    return GateSpec{GateKind::single, std::move(name), u, {mode}, 0};
}

inline GateSpec make_two(const Matrix& u, std::size_t first, std::size_t second, std::string name = "U2") {
    if (u.rows() != 4 || u.cols() != 4) throw Error(ErrorKind::BadDimension, "two-mode gate must be 4x4");
    if (!is_unitary(u)) throw Error(ErrorKind::NotUnitary, "gate " + name + " is not unitary");
    detail::require_distinct({first, second});
    return GateSpec{GateKind::two, std::move(name), u, {first, second}, 0};
}

inline GateSpec make_create(const CreationIsometry& v, std::size_t source0, std::size_t source1,
                            std::size_t target0, std::size_t target1, std::string name = "default") {
    std::vector<std::size_t> modes{source0, source1, target0, target1};
    detail::require_distinct(modes);
    return GateSpec{GateKind::create, std::move(name), v.matrix(), std::move(modes), 0};
}

inline GateSpec make_suppressed(const Matrix& u, std::vector<std::size_t> modes, int budget,
                                std::string name = "SUP") {
    const auto n = detail::log2_exact(u.rows());
    if (u.rows() != u.cols() || !n || *n < 1)
        throw Error(ErrorKind::BadDimension, "suppressed gate must be 2^n x 2^n with n >= 1");
    if (modes.size() != *n)
        throw Error(ErrorKind::ValidationError, "suppressed gate " + name + " acts on " + std::to_string(*n) +
                                                    " modes, " + std::to_string(modes.size()) + " given");
    detail::require_distinct(modes);
    if (!is_unitary(u)) throw Error(ErrorKind::NotUnitary, "gate " + name + " is not unitary");
    const double deficit = trace_deficit(u);
    const double limit = std::ldexp(1.0, -budget);
    if (deficit > limit + kBudgetSlack)
        throw Error(ErrorKind::BudgetExceeded, "gate " + name + " has |Tr(I-U)| = " + std::to_string(deficit) +
                                                   " > 2^-" + std::to_string(budget));
    return GateSpec{GateKind::suppressed, std::move(name), u, std::move(modes), budget};
}

// --- Seeded random matrices -------------------------------------------------

/// Entries i.i.d. standard complex normal (E|z|^2 = 1).
template <class Rng>
Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, std::numbers::sqrt2 / 2);
    Matrix a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double re = normal(rng);
            const double im = normal(rng);
            a(i, j) = Complex(re, im);
        }
    return a;
}

/// (A + A^dagger)/2 scaled to unit spectral norm.
template <class Rng>
Matrix random_hermitian(Eigen::Index dim, Rng& rng) {
    const Matrix a = random_gaussian(dim, dim, rng);
    Matrix h = (a + a.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
    const double spectral = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (spectral > 0) h /= spectral;
    return h;
}

/// Haar-distributed isometry from the QR factorization of a Gaussian matrix,
/// with the diagonal phases of R absorbed.
template <class Rng>
Matrix random_isometry(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    const Matrix a = random_gaussian(rows, cols, rng);
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
    const Matrix r = qr.matrixQR();
    for (Eigen::Index j = 0; j < cols; ++j) {
        const double mag = std::abs(r(j, j));
        if (mag > 0) q.col(j) *= r(j, j) / mag;
    }
    return q;
}

template <class Rng>
Matrix random_unitary(Eigen::Index dim, Rng& rng) {
    return random_isometry(dim, dim, rng);
}

// --- Suppressed multi-qubit gates -------------------------------------------

/// exp(-i eps H) for Hermitian H, assembled as I + Q diag(e^{-i eps l} - 1) Q^dagger
/// so diagonal entries near one keep their small offsets.
inline Matrix suppressed_unitary(const Matrix& hamiltonian, double epsilon) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(hamiltonian);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const Matrix& q = eig.eigenvectors();
    Eigen::VectorXcd shift(lambda.size());
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        const double theta = epsilon * lambda(k);
        const double half = std::sin(theta / 2);
        shift(k) = Complex(-2.0 * half * half, -std::sin(theta));
    }
    return Matrix::Identity(hamiltonian.rows(), hamiltonian.cols()) + q * shift.asDiagonal() * q.adjoint();
}

struct SuppressedGate {
    std::size_t qubits = 0;
    double coupling = kDefaultCoupling;
    int vertices = 1;
    std::uint64_t seed = 0;
    std::uint64_t seed_used = 0;
    double target_deficit = 0.0;
    double achieved_deficit = 0.0;
    double epsilon = 0.0;
    Matrix hamiltonian;
    Matrix unitary;

    /// Gate on modes 0..n-1 unless other modes are given.
    GateSpec gate(std::vector<std::size_t> modes = {}, std::string name = "SUP") const {
        if (modes.empty())
            for (std::size_t k = 0; k < qubits; ++k) modes.push_back(k);
        return make_suppressed(unitary, std::move(modes), static_cast<int>(qubits), std::move(name));
    }
};

/// min(2^-n, coupling^vertices)
inline double suppression_target(std::size_t qubits, double coupling, int vertices) {
    return std::min(std::ldexp(1.0, -static_cast<int>(qubits)), std::pow(coupling, vertices));
}

namespace detail {

// |Tr(I - exp(-i eps H))| from the spectrum.
inline double spectral_deficit(const Eigen::VectorXd& lambda, double epsilon) {
    Complex sum{};
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        const double theta = epsilon * lambda(k);
        const double half = std::sin(theta / 2);
        sum += Complex(2.0 * half * half, std::sin(theta));
    }
    return std::abs(sum);
}

// Bisection for eps with spectral_deficit(eps) == target on a bracket grown by
// doubling. The objective must be nondecreasing on the bracket.
inline double solve_epsilon(const Eigen::VectorXd& lambda, double target) {
    constexpr double kMaxEpsilon = 2 * std::numbers::pi;
    double hi = 1.0 / 1024;
    while (spectral_deficit(lambda, hi) < target) {
        hi *= 2;
        if (hi > kMaxEpsilon) throw Error(ErrorKind::BisectionFailure, "cannot bracket the deficit target");
    }
    constexpr int kGrid = 256;
    double previous = 0.0;
    for (int k = 1; k <= kGrid; ++k) {
        const double value = spectral_deficit(lambda, hi * k / kGrid);
        if (value + 1e-15 < previous)
            throw Error(ErrorKind::BisectionFailure, "deficit is not monotone on the bracket");
        previous = value;
    }
    double lo = 0.0;
    for (int iter = 0; iter < 2000; ++iter) {
        const double mid = lo + (hi - lo) / 2;
        if (mid <= lo || mid >= hi) break;
        if (spectral_deficit(lambda, mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return std::abs(spectral_deficit(lambda, lo) - target) <= std::abs(spectral_deficit(lambda, hi) - target) ? lo
                                                                                                               : hi;
}

} // namespace detail

/// Seeded n-qubit unitary exp(-i eps H) tuned so that |Tr(I - U)| equals
/// min(2^-n, coupling^vertices). Pure function of its arguments. A seed whose
/// Hamiltonian defeats the bisection is replaced by seed+1 (reported in
/// seed_used).
inline SuppressedGate generate_suppressed(std::size_t qubits, double coupling = kDefaultCoupling, int vertices = 1,
                                          std::uint64_t seed = 0) {
    if (qubits < 1 || qubits > kMaxSuppressedQubits)
        throw Error(ErrorKind::BadDimension, "suppressed gates support 1 <= n <= 6, got n = " + std::to_string(qubits));
    if (!(coupling > 0.0 && coupling < 1.0))
        throw Error(ErrorKind::BadDimension, "coupling must lie in (0, 1)");
    if (vertices < 1) throw Error(ErrorKind::BadDimension, "vertex count must be >= 1");

    const auto dim = static_cast<Eigen::Index>(1) << qubits;
    const double target = suppression_target(qubits, coupling, vertices);
    constexpr int kAttempts = 16;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt);
        std::mt19937_64 rng(s);
        Matrix h = random_hermitian(dim, rng);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
        double epsilon = 0.0;
        try {
            epsilon = detail::solve_epsilon(eig.eigenvalues(), target);
        } catch (const Error&) {
            continue;
        }
        SuppressedGate out;
        out.qubits = qubits;
        out.coupling = coupling;
        out.vertices = vertices;
        out.seed = seed;
        out.seed_used = s;
        out.target_deficit = target;
        out.epsilon = epsilon;
        out.unitary = suppressed_unitary(h, epsilon);
        out.hamiltonian = std::move(h);
        out.achieved_deficit = trace_deficit(out.unitary);
        return out;
    }
    throw Error(ErrorKind::BisectionFailure, "no usable Hamiltonian after " + std::to_string(kAttempts) + " seeds");
}

// --- Qutrit lift ------------------------------------------------------------

/// Completes the given orthonormal columns to a unitary. Columns listed in
/// `fixed` are kept; the others are filled, in ascending index order, with the
/// canonical basis vectors e_0, e_1, ... orthogonalized against everything
/// accepted so far. Vectors with residual norm below 1e-6 are skipped.
inline Matrix complete_unitary(const Matrix& partial, const std::vector<Eigen::Index>& fixed) {
    const Eigen::Index dim = partial.rows();
    Matrix out = Matrix::Zero(dim, dim);
    std::vector<bool> taken(static_cast<std::size_t>(dim), false);
    std::vector<Eigen::VectorXcd> basis;
    for (Eigen::Index col : fixed) {
        out.col(col) = partial.col(col);
        taken[static_cast<std::size_t>(col)] = true;
        basis.emplace_back(partial.col(col));
    }
    Eigen::Index next_col = 0;
    auto advance = [&] {
        while (next_col < dim && taken[static_cast<std::size_t>(next_col)]) ++next_col;
    };
    advance();
    for (Eigen::Index e = 0; e < dim && next_col < dim; ++e) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Unit(dim, e);
        // two passes of modified Gram-Schmidt
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) v -= b * b.dot(v);
        const double norm = v.norm();
        if (norm < 1e-6) continue;
        v /= norm;
        out.col(next_col) = v;
        taken[static_cast<std::size_t>(next_col)] = true;
        basis.push_back(std::move(v));
        advance();
    }
    if (next_col < dim) throw Error(ErrorKind::NotIsometry, "columns do not extend to a unitary");
    return out;
}

namespace detail {

// Embeds a 2^k x 2^k block into the 3^k x 3^k qutrit space; identity on every
// local basis state with an omega digit.
inline Matrix lift_block(const Matrix& u, std::size_t k) {
    const std::size_t dim = pow3(k);
    Matrix out = Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    std::vector<Eigen::Index> binary_of(dim, -1);
    std::vector<Eigen::Index> qutrit_index;
    for (std::size_t l = 0; l < dim; ++l) {
        std::size_t rest = l;
        Eigen::Index bits = 0;
        bool binary = true;
        std::vector<std::size_t> digits(k);
        for (std::size_t j = k; j-- > 0;) {
            digits[j] = rest % 3;
            rest /= 3;
        }
        for (std::size_t d : digits) {
            if (d == 2) binary = false;
            bits = bits * 2 + static_cast<Eigen::Index>(d & 1);
        }
        if (binary) {
            binary_of[l] = bits;
            qutrit_index.push_back(static_cast<Eigen::Index>(l));
        }
    }
    for (Eigen::Index row : qutrit_index)
        for (Eigen::Index col : qutrit_index) out(row, col) = u(binary_of[row], binary_of[col]);
    return out;
}

} // namespace detail

/// Qutrit-space unitary (dimension 3^k over the gate's modes, in listed order)
/// that the gate corresponds to in the fixed-width picture.
inline Matrix lift_to_qutrit(const GateSpec& g) {
    if (g.kind != GateKind::create) return detail::lift_block(g.matrix, g.modes.size());

    Matrix partial = Matrix::Zero(81, 81);
    std::vector<Eigen::Index> fixed;
    for (int t = 0; t < 2; ++t)
        for (int u = 0; u < 2; ++u) {
            const Eigen::Index col = 27 * t + 9 * u + 3 * 2 + 2;
            for (int r = 0; r < 16; ++r) {
                const int p = (r >> 3) & 1, q = (r >> 2) & 1, s0 = (r >> 1) & 1, s1 = r & 1;
                partial(27 * p + 9 * q + 3 * s0 + s1, col) = g.matrix(r, 2 * t + u);
            }
            fixed.push_back(col);
        }
    return complete_unitary(partial, fixed);
}

} // namespace qedsim
