#pragma once

// Command-line front end. Exit codes: 0 success, 1 input or validation
// error, 2 runtime fault (or a failed equivalence check).

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qedsim/circuit_io.hpp"
#include "qedsim/engine.hpp"
#include "qedsim/equivalence.hpp"
#include "qedsim/gates.hpp"

namespace qedsim::cli {

struct CliConfig {
    std::string subcommand;
    std::string input_path;
    Backend backend = Backend::fock;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    double tol = kDefaultEquivalenceTolerance;
    OutputFormat output = OutputFormat::json;
    std::string out_path;
    bool strict = false;
    // gen-gate
    std::size_t qubits = 1;
    double coupling = kDefaultCoupling;
    int vertices = 1;
};

inline int exit_code_for(const Error& e) { return is_runtime_fault(e.kind()) ? 2 : 1; }

namespace detail {

inline void emit(const CliConfig& cfg, const std::string& document, std::ostream& out) {
    if (cfg.out_path.empty()) {
        out << document;
        return;
    }
    std::ofstream file(cfg.out_path, std::ios::binary);
    if (!file) throw Error(ErrorKind::Io, cfg.out_path + ": cannot open for writing");
    file << document;
}

} // namespace detail

inline int cmd_run(const CliConfig& cfg, std::ostream& out) {
    const Circuit circuit = load_circuit(cfg.input_path);
    SimOptions opts;
    opts.strict = cfg.strict;
    const RunResult result = run(circuit, cfg.backend, cfg.shots, cfg.seed, opts);
    detail::emit(cfg, write_result(result, cfg.output), out);
    return 0;
}

inline int cmd_compare(const CliConfig& cfg, std::ostream& out) {
    const Circuit circuit = load_circuit(cfg.input_path);
    SimOptions opts;
    opts.strict = cfg.strict;
    const EquivalenceReport report = check_equivalence(circuit, cfg.tol, {cfg.seed}, opts);
    detail::emit(cfg, report_to_json(report).dump(2) + "\n", out);
    return report.pass ? 0 : 2;
}

inline json gen_gate_document(const SuppressedGate& g) {
    return json{{"matrix", matrix_to_json(g.unitary)},
                {"metadata",
                 {{"n", g.qubits},
                  {"coupling", g.coupling},
                  {"vertices", g.vertices},
                  {"target_deficit", g.target_deficit},
                  {"achieved_deficit", g.achieved_deficit},
                  {"epsilon", g.epsilon},
                  {"seed", g.seed},
                  {"seed_used", g.seed_used}}}};
}

inline int cmd_gen_gate(const CliConfig& cfg, std::ostream& out) {
    const SuppressedGate g = generate_suppressed(cfg.qubits, cfg.coupling, cfg.vertices, cfg.seed);
    detail::emit(cfg, gen_gate_document(g).dump(2) + "\n", out);
    return 0;
}

inline int cmd_validate(const CliConfig& cfg, std::ostream& out) {
    const Circuit circuit = load_circuit(cfg.input_path);
    std::size_t creates = 0;
    for (const GateSpec& g : circuit.gates) creates += g.kind == GateKind::create ? 1 : 0;
    const json doc{{"valid", true},
                   {"modes", circuit.mode_count},
                   {"gates", circuit.gates.size()},
                   {"create_gates", creates},
                   {"particle_growth_bound", particle_growth_bound(circuit)}};
    detail::emit(cfg, doc.dump(2) + "\n", out);
    return 0;
}

inline int dispatch(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.subcommand == "run" || cfg.subcommand == "sample") return cmd_run(cfg, out);
        if (cfg.subcommand == "compare") return cmd_compare(cfg, out);
        if (cfg.subcommand == "gen-gate") return cmd_gen_gate(cfg, out);
        if (cfg.subcommand == "validate") return cmd_validate(cfg, out);
        err << "error: unknown subcommand '" << cfg.subcommand << "'\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Particle-creation circuit simulator with a qutrit reference backend"};
    app.require_subcommand(1);
    CliConfig cfg;

    const std::map<std::string, Backend> backends{{"fock", Backend::fock}, {"qutrit", Backend::qutrit}};
    const std::map<std::string, OutputFormat> formats{{"json", OutputFormat::json}, {"csv", OutputFormat::csv}};

    std::string backend_name = "fock";
    std::string run_format = "json";
    std::string sample_format = "csv";
    auto add_sim_flags = [&](CLI::App* sub) {
        sub->add_option("input", cfg.input_path, "circuit file (.qed)")->required();
        sub->add_option("--backend", backend_name, "fock or qutrit")->check(CLI::IsMember({"fock", "qutrit"}));
        sub->add_option("--seed", cfg.seed, "sampling seed");
        sub->add_option("--out,-o", cfg.out_path, "write to file instead of stdout");
        sub->add_flag("--strict", cfg.strict, "fail when a gate only meets omega branches");
    };

    auto* run_cmd = app.add_subcommand("run", "simulate a circuit and print the result");
    add_sim_flags(run_cmd);
    run_cmd->add_option("--shots", cfg.shots, "measurement shots (0: amplitudes only)");
    run_cmd->add_option("--format", run_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    std::uint64_t sample_shots = 1000;
    auto* sample_cmd = app.add_subcommand("sample", "simulate and print a measurement histogram");
    add_sim_flags(sample_cmd);
    sample_cmd->add_option("--shots", sample_shots, "measurement shots")->check(CLI::PositiveNumber);
    sample_cmd->add_option("--format", sample_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    auto* compare_cmd = app.add_subcommand("compare", "check Fock and qutrit backends agree");
    compare_cmd->add_option("input", cfg.input_path, "circuit file (.qed)")->required();
    compare_cmd->add_option("--tol", cfg.tol, "max entrywise difference");
    compare_cmd->add_option("--seed", cfg.seed, "seed recorded in the report");
    compare_cmd->add_option("--out,-o", cfg.out_path, "write to file instead of stdout");

    auto* gen_cmd = app.add_subcommand("gen-gate", "generate a suppressed multi-qubit gate");
    gen_cmd->add_option("--n", cfg.qubits, "qubit count (1..6)");
    gen_cmd->add_option("--coupling", cfg.coupling, "coupling constant per vertex");
    gen_cmd->add_option("--vertices", cfg.vertices, "vertex count N");
    gen_cmd->add_option("--seed", cfg.seed, "generator seed");
    gen_cmd->add_option("--out,-o", cfg.out_path, "write to file instead of stdout");

    auto* validate_cmd = app.add_subcommand("validate", "parse and statically validate a circuit");
    validate_cmd->add_option("input", cfg.input_path, "circuit file (.qed)")->required();
    validate_cmd->add_option("--out,-o", cfg.out_path, "write to file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    cfg.backend = backends.at(backend_name);
    if (*run_cmd) {
        cfg.subcommand = "run";
        cfg.output = formats.at(run_format);
    }
    if (*sample_cmd) {
        cfg.subcommand = "sample";
        cfg.shots = sample_shots;
        cfg.output = formats.at(sample_format);
    }
    if (*compare_cmd) cfg.subcommand = "compare";
    if (*gen_cmd) cfg.subcommand = "gen-gate";
    if (*validate_cmd) cfg.subcommand = "validate";
    return dispatch(cfg, out, err);
}

} // namespace qedsim::cli
