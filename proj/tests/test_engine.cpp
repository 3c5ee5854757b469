#include "qedsim/engine.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support/random_circuits.hpp"

using namespace qedsim;

namespace {

Configuration ket(const char* s) { return *Configuration::from_string(s); }

const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

GateSpec h(std::size_t m) { return make_single(builtin::hadamard(), m, "H"); }

Circuit circuit(std::size_t modes, const char* init, std::vector<GateSpec> gates) {
    return Circuit{modes, {{ket(init), 1.0}}, std::move(gates)};
}

} // namespace

TEST(SimulateFock, HadamardOnOccupiedMode) {
    const auto s = simulate_fock(circuit(4, "0WWW", {h(0)}));
    EXPECT_EQ(s.size(), 2u);
    EXPECT_NEAR(s.amplitude(ket("0WWW")).real(), kInvSqrt2, 1e-15);
    EXPECT_NEAR(s.amplitude(ket("1WWW")).real(), kInvSqrt2, 1e-15);
}

TEST(SimulateFock, CreationAfterHadamard) {
    const auto s = simulate_fock(circuit(4, "00WW", {h(0), make_create(default_creation(), 0, 1, 2, 3)}));
    EXPECT_EQ(s.size(), 2u);
    EXPECT_NEAR(s.amplitude(ket("0000")).real(), kInvSqrt2, 1e-15);
    EXPECT_NEAR(s.amplitude(ket("1010")).real(), kInvSqrt2, 1e-15);
}

TEST(SimulateFock, ParticleNumberSuperpositionPrep) {
    // 1/sqrt2 (|1W> + |00>) -> H on 0 -> CNOT 0 1 gives the canonical
    // 1/2 (|0W> - |1W>) + 1/2 (|00> + |11>).
    Circuit c{2,
              {{ket("1W"), kInvSqrt2}, {ket("00"), kInvSqrt2}},
              {h(0), make_two(builtin::cnot(), 0, 1, "CNOT")}};
    const auto s = simulate_fock(c);
    const auto target = make_state(2, {{ket("0W"), 0.5}, {ket("1W"), -0.5}, {ket("00"), 0.5}, {ket("11"), 0.5}});
    EXPECT_NEAR(std::abs(inner_product(target, s)), 1.0, 1e-12);
}

TEST(SimulateFock, GatesLeaveOmegaBranchesUntouched) {
    Circuit c{2, {{ket("0W"), 1.0}, {ket("10"), 1.0}}, {make_two(builtin::cnot(), 0, 1, "CNOT")}};
    const auto s = simulate_fock(c);
    EXPECT_NEAR(s.amplitude(ket("0W")).real(), kInvSqrt2, 1e-15);
    EXPECT_NEAR(s.amplitude(ket("11")).real(), kInvSqrt2, 1e-15);
}

TEST(SimulateFock, StrictModeRejectsOmegaOnlyGate) {
    const Circuit c = circuit(2, "0W", {h(1)});
    EXPECT_NO_THROW(simulate_fock(c));
    SimOptions strict;
    strict.strict = true;
    try {
        simulate_fock(c, strict);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::StrictOmega);
    }
}

TEST(ApplyGate, CreationRuntimeFaults) {
    const auto create = make_create(default_creation(), 0, 1, 2, 3);
    try {
        apply_gate(basis_state(ket("0W00")), create);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::CreationOnVacuum);
    }
    try {
        apply_gate(basis_state(ket("000W")), create);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::CreationCollision);
    }
}

TEST(Validate, StaticChecks) {
    auto expect_invalid = [](const Circuit& c) {
        try {
            validate(c);
            FAIL() << "accepted invalid circuit";
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::StaticValidation);
        }
    };
    expect_invalid(circuit(2, "00", {h(5)}));
    expect_invalid(Circuit{0, {}, {}});
    // target occupied initially
    expect_invalid(circuit(4, "000W", {make_create(default_creation(), 0, 1, 2, 3)}));
    // target touched by an earlier gate
    expect_invalid(circuit(4, "00WW", {h(2), make_create(default_creation(), 0, 1, 2, 3)}));
    // target occupied in one branch only
    expect_invalid(Circuit{4, {{ket("00WW"), 1.0}, {ket("000W"), 1.0}}, {make_create(default_creation(), 0, 1, 2, 3)}});
    // hand-built non-unitary gate
    GateSpec bad = h(0);
    bad.matrix(0, 0) = 2.0;
    expect_invalid(circuit(1, "0", {bad}));
    EXPECT_NO_THROW(validate(circuit(4, "00WW", {h(0), make_create(default_creation(), 0, 1, 2, 3)})));
}

TEST(Validate, DefaultInitialStateIsAllZero) {
    const Circuit c{3, {}, {}};
    EXPECT_EQ(initial_state(c), basis_state(ket("000")));
}

TEST(SimulateQutrit, EmptyCircuit) {
    const auto v = simulate_qutrit(circuit(2, "0W", {}));
    ASSERT_EQ(v.entries.size(), 9u);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(v.entries[i], Amplitude(i == 2 ? 1.0 : 0.0));
}

TEST(SimulateQutrit, HadamardOnOneMode) {
    const auto v = simulate_qutrit(circuit(1, "0", {h(0)}));
    EXPECT_NEAR(v.entries[0].real(), kInvSqrt2, 1e-15);
    EXPECT_NEAR(v.entries[1].real(), kInvSqrt2, 1e-15);
    EXPECT_EQ(v.entries[2], Amplitude(0.0));
}

TEST(SimulateQutrit, MatchesFockOnCreationCircuit) {
    const Circuit c = circuit(4, "00WW", {h(0), make_create(default_creation(), 0, 1, 2, 3)});
    const auto fock = embed(simulate_fock(c));
    const auto dense = simulate_qutrit(c);
    for (std::size_t i = 0; i < dense.entries.size(); ++i)
        EXPECT_NEAR(std::abs(fock.entries[i] - dense.entries[i]), 0.0, 1e-12);
}

TEST(SimulateQutrit, DimensionGuard) {
    Circuit c{15, {}, {}};
    try {
        simulate_qutrit(c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionGuard);
    }
    // the Fock backend has no such cap
    Circuit wide{20, {}, {h(19)}};
    EXPECT_EQ(simulate_fock(wide).size(), 2u);
}

TEST(SimulateQutrit, ThreadedMatchesSerial) {
    Circuit c{11, {}, {}};
    for (std::size_t m = 0; m < 11; ++m) c.gates.push_back(h(m));
    c.gates.push_back(make_two(builtin::cnot(), 0, 10, "CNOT"));
    SimOptions serial, threaded;
    serial.threads = 1;
    threaded.threads = 4;
    EXPECT_EQ(simulate_qutrit(c, serial), simulate_qutrit(c, threaded));
}

TEST(Sample, DeterministicState) {
    const auto hist = sample(basis_state(ket("11")), 100, 5);
    ASSERT_EQ(hist.size(), 1u);
    EXPECT_EQ(hist.at(ket("11")), 100u);
}

TEST(Sample, ReproducibleAndCountsSumToShots) {
    const auto s = make_state(2, {{ket("0W"), 0.5}, {ket("1W"), -0.5}, {ket("00"), 0.5}, {ket("11"), 0.5}});
    const auto a = sample(s, 5000, 42);
    EXPECT_EQ(a, sample(s, 5000, 42));
    std::uint64_t total = 0;
    for (const auto& [c, n] : a) total += n;
    EXPECT_EQ(total, 5000u);
    EXPECT_TRUE(sample(s, 0, 1).empty());
}

TEST(Sample, MinusStateWithinFourSigma) {
    const auto s = make_state(1, {{ket("0"), kInvSqrt2}, {ket("1"), -kInvSqrt2}});
    const auto hist = sample(s, 100000, 2026);
    const double sigma = std::sqrt(100000 * 0.25);
    for (const char* k : {"0", "1"}) EXPECT_LE(std::abs(double(hist.at(ket(k))) - 50000.0), 4 * sigma);
}

TEST(Run, RecordsMetadata) {
    const Circuit c = circuit(4, "00WW", {h(0), make_create(default_creation(), 0, 1, 2, 3)});
    const auto r = run(c, Backend::qutrit, 10, 3);
    EXPECT_EQ(r.backend, Backend::qutrit);
    EXPECT_EQ(r.shots, 10u);
    EXPECT_EQ(r.seed, 3u);
    ASSERT_TRUE(r.qutrit_state);
    EXPECT_EQ(r.histogram, run(c, Backend::fock, 10, 3).histogram);
}

TEST(GrowthBound, Counts) {
    EXPECT_EQ(particle_growth_bound(circuit(4, "00WW", {make_create(default_creation(), 0, 1, 2, 3)})), 4u);
    EXPECT_EQ(particle_growth_bound(circuit(4, "00WW", {h(0)})), 2u);
}

TEST(GrowthBound, MatchesSimulationForChainedCreation) {
    // g create gates on 2 + 2g modes, each fed by the previous pair
    for (std::size_t g = 0; g <= 3; ++g) {
        const std::size_t modes = 2 + 2 * g;
        std::string init = "00" + std::string(2 * g, 'W');
        Circuit c{modes, {{ket(init.c_str()), 1.0}}, {h(0)}};
        for (std::size_t k = 0; k < g; ++k)
            c.gates.push_back(make_create(default_creation(), 2 * k, 2 * k + 1, 2 * k + 2, 2 * k + 3));
        EXPECT_EQ(particle_growth_bound(c), 2 + 2 * g);
        EXPECT_EQ(max_occupied(simulate_fock(c)), 2 + 2 * g);
    }
}

TEST(EngineProperties, OmegaLocalityAndNorm) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Circuit c = qedsim::testing::random_circuit(seed);
        SparseState s = initial_state(c);
        for (const GateSpec& g : c.gates) {
            const SparseState next = apply_gate(s, g);
            EXPECT_NEAR(next.norm(), 1.0, 1e-9);
            // occupancy pattern per branch: unchanged except created targets
            std::set<std::vector<bool>> before, after;
            for (const auto& [config, a] : s.terms()) {
                std::vector<bool> pattern;
                for (std::size_t m = 0; m < config.size(); ++m) {
                    bool occupied = is_occupied(config[m]);
                    if (g.kind == GateKind::create && (m == g.modes[2] || m == g.modes[3])) occupied = true;
                    pattern.push_back(occupied);
                }
                before.insert(pattern);
            }
            for (const auto& [config, a] : next.terms()) {
                std::vector<bool> pattern;
                for (std::size_t m = 0; m < config.size(); ++m) pattern.push_back(is_occupied(config[m]));
                after.insert(pattern);
            }
            for (const auto& p : after) EXPECT_TRUE(before.count(p)) << "seed " << seed;
            s = next;
        }
    }
}
