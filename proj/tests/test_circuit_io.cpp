#include "qedsim/circuit_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>

#include "support/corpus.hpp"
#include "support/random_circuits.hpp"

using namespace qedsim;

namespace fs = std::filesystem;

namespace {

Configuration ket(const char* s) { return *Configuration::from_string(s); }

const fs::path kSourceDir = QEDSIM_SOURCE_DIR;

ParseError parse_failure(const std::string& text) {
    try {
        parse_circuit(text);
    } catch (const ParseError& e) {
        return e;
    }
    ADD_FAILURE() << "parsed without error: " << text;
    return ParseError(ErrorKind::SyntaxError, 0, 0, "");
}

} // namespace

TEST(ParseCircuit, SmallestProgram) {
    const Circuit c = parse_circuit("modes 1\ninit 0\napply H 0");
    EXPECT_EQ(c.mode_count, 1u);
    ASSERT_EQ(c.gates.size(), 1u);
    EXPECT_EQ(c.gates[0].kind, GateKind::single);
    EXPECT_EQ(c.gates[0].name, "H");
    EXPECT_EQ(c.gates[0].matrix, builtin::hadamard());
    EXPECT_EQ(c.gates[0].modes, std::vector<std::size_t>{0});
}

TEST(ParseCircuit, ShippedCreationCircuit) {
    const Circuit c = load_circuit((kSourceDir / "circuits" / "creation.qed").string());
    EXPECT_EQ(c.mode_count, 4u);
    ASSERT_EQ(c.initial.size(), 1u);
    EXPECT_EQ(c.initial[0].first, ket("00WW"));
    ASSERT_EQ(c.gates.size(), 2u);
    EXPECT_EQ(c.gates[1].kind, GateKind::create);
    EXPECT_EQ(c.gates[1].modes, (std::vector<std::size_t>{0, 1, 2, 3}));
    EXPECT_EQ(c.gates[1].matrix, default_creation().matrix());
}

TEST(ParseCircuit, ModeOutOfRange) {
    const ParseError e = parse_failure("modes 2\napply H 5");
    EXPECT_EQ(e.kind(), ErrorKind::ValidationError);
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 9u);
    EXPECT_NE(e.detail().find("mode 5 out of range"), std::string::npos);
}

TEST(ParseCircuit, InitTerms) {
    const Circuit c = parse_circuit("modes 2\ninit 0.5*0W + -0.5*1W + 0.25+0.5i*00 + 1-2e-1i*11\n");
    ASSERT_EQ(c.initial.size(), 4u);
    EXPECT_EQ(c.initial[1].second, Amplitude(-0.5));
    EXPECT_EQ(c.initial[2].second, Amplitude(0.25, 0.5));
    EXPECT_EQ(c.initial[3].second, Amplitude(1.0, -0.2));
    EXPECT_EQ(c.initial[3].first, ket("11"));
}

TEST(ParseCircuit, SuppressedGateBudget) {
    const auto g = generate_suppressed(2, kDefaultCoupling, 3, 5);
    const std::string text =
        "modes 2\ndefgate G matrix " + matrix_to_inline(g.unitary) + "\nsuppressed G on 1 0 budget 2\n";
    const Circuit c = parse_circuit(text);
    ASSERT_EQ(c.gates.size(), 1u);
    EXPECT_EQ(c.gates[0].kind, GateKind::suppressed);
    EXPECT_EQ(c.gates[0].budget, 2);
    EXPECT_EQ(c.gates[0].matrix, g.unitary);
    EXPECT_EQ(c.gates[0].modes, (std::vector<std::size_t>{1, 0}));
}

TEST(ParseCircuit, ApplyRejectsLargeMatrices) {
    const auto g = generate_suppressed(3, kDefaultCoupling, 3, 5);
    const ParseError e =
        parse_failure("modes 3\ndefgate G matrix " + matrix_to_inline(g.unitary) + "\napply G 0 1 2\n");
    EXPECT_EQ(e.kind(), ErrorKind::ValidationError);
    EXPECT_EQ(e.line(), 3u);
}

TEST(FormatCircuit, CanonicalFloats) {
    Circuit c{2, {{ket("0W"), 0.5}, {ket("11"), Amplitude(0.5, -0.25)}}, {}};
    const std::string text = format_circuit(c);
    EXPECT_NE(text.find("init 0.5*0W + 0.5-0.25i*11"), std::string::npos) << text;
    EXPECT_EQ(text.find("0.50000"), std::string::npos);
    EXPECT_EQ(parse_circuit(text), c);
}

TEST(FormatCircuit, EmitsMatricesRowMajor) {
    Matrix u(2, 2);
    u << 0, Complex(0, 1), Complex(0, 1), 0;
    Circuit c{1, {}, {make_single(u, 0, "iX")}};
    const std::string text = format_circuit(c);
    EXPECT_NE(text.find("defgate iX matrix [[[0,0],[0,1]],[[0,1],[0,0]]]"), std::string::npos) << text;
    EXPECT_EQ(parse_circuit(text), c);
}

TEST(FormatCircuit, RenamesClashingGateNames) {
    Matrix u(2, 2);
    u << 0, Complex(0, 1), Complex(0, 1), 0;
    // A gate named like a built-in but carrying a different matrix.
    Circuit c{1, {}, {make_single(u, 0, "H"), make_single(builtin::hadamard(), 0, "H")}};
    const Circuit back = parse_circuit(format_circuit(c));
    EXPECT_EQ(back.gates[0].matrix, u);
    EXPECT_EQ(back.gates[1].matrix, builtin::hadamard());
}

TEST(FormatCircuit, RoundTripsShippedCircuits) {
    for (const auto& entry : fs::directory_iterator(kSourceDir / "circuits")) {
        const Circuit c = load_circuit(entry.path().string());
        const std::string text = format_circuit(c);
        EXPECT_EQ(parse_circuit(text), c) << entry.path();
        EXPECT_EQ(format_circuit(parse_circuit(text)), text);
    }
}

TEST(MatrixJson, RowMajorPairs) {
    Matrix m(2, 2);
    m << 1, Complex(0, -0.5), 0.25, 0;
    const json j = matrix_to_json(m);
    EXPECT_EQ(j.dump(), "[[[1,0],[0,-0.5]],[[0.25,0],[0,0]]]");
    EXPECT_EQ(matrix_from_json(j), m);
    EXPECT_EQ(matrix_from_json(json::parse("[[1,0],[0,1]]")), Matrix(Matrix::Identity(2, 2)));
    EXPECT_THROW(matrix_from_json(json::parse("[[1,0],[0]]")), Error);
    EXPECT_THROW(matrix_from_json(json::parse("[[[1,0,0]]]")), Error);
}

TEST(MatrixJson, ShortestRoundTripDecimals) {
    const double x = 1.0 / 3.0;
    EXPECT_EQ(format_double(0.5), "0.5");
    EXPECT_EQ(std::stod(format_double(x)), x);
    Matrix m(1, 1);
    m << Complex(x, -x);
    EXPECT_EQ(matrix_from_json(json::parse(matrix_to_json(m).dump())), m);
}

TEST(WriteResult, CsvForDeterministicState) {
    const Circuit c{2, {{ket("11"), 1.0}}, {}};
    const auto r = run(c, Backend::fock, 10, 0);
    EXPECT_EQ(write_result(r, OutputFormat::csv), "outcome,count,probability\n11,10,1.0\n");
}

TEST(WriteResult, ZeroShotsGivesAmplitudesOnly) {
    const Circuit c{1, {}, {make_single(builtin::hadamard(), 0, "H")}};
    const auto r = run(c, Backend::fock, 0, 0);
    const json j = json::parse(write_result(r, OutputFormat::json));
    EXPECT_EQ(j.at("histogram"), json::object());
    EXPECT_EQ(j.at("amplitudes").size(), 2u);
    for (const char* key : {"backend", "seed", "shots", "histogram", "amplitudes", "wall_time_ms"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(write_result(r, OutputFormat::csv), "outcome,count,probability\n");
}

TEST(WriteResult, MinusStateAmplitudes) {
    const double r = 1.0 / std::numbers::sqrt2;
    const auto s = make_state(1, {{ket("0"), 1.0}, {ket("1"), -1.0}});
    EXPECT_EQ(amplitudes_to_json(s).dump(), R"({"0":[0.7071067811865476,0],"1":[-0.7071067811865476,0]})");
    EXPECT_NEAR(s.amplitude(ket("0")).real(), r, 2e-16);
}

TEST(ParseErrors, PositionsAreOneBased) {
    const ParseError e = parse_failure("  modes x");
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.column(), 9u);
    const ParseError missing = parse_failure("# only a comment\n");
    EXPECT_EQ(missing.line(), 1u);
    EXPECT_EQ(missing.column(), 1u);
}

TEST(Corpus, ValidFilesRoundTrip) {
    const auto files = qedsim::testing::corpus_files(kSourceDir / "tests" / "corpus" / "valid");
    EXPECT_GE(files.size(), 25u);
    for (const auto& f : files) EXPECT_EQ(qedsim::testing::check_round_trip(f), "");
}

TEST(Corpus, ErrorPositions) {
    const auto files = qedsim::testing::corpus_files(kSourceDir / "tests" / "corpus" / "errors");
    EXPECT_GE(files.size(), 10u);
    for (const auto& f : files) EXPECT_EQ(qedsim::testing::check_error_file(f), "");
}

TEST(FormatCircuit, RandomCircuitsRoundTrip) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Circuit c = qedsim::testing::random_circuit(seed);
        const std::string text = format_circuit(c);
        EXPECT_EQ(parse_circuit(text), c) << "seed " << seed << "\n" << text;
    }
}
