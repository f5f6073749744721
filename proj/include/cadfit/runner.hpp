#pragma once

#include "cadfit/assembly.hpp"
#include "cadfit/program.hpp"

#include <optional>
#include <string>

namespace cadfit {

inline constexpr const char* kToolVersion = "cadfit 0.1.0";

enum class Complexity { easy, medium, hard };
Complexity complexity_from_name(const std::string& name);

// Random valid program: easy 1-2 ops, medium 3-4 with a cut, hard 5-6 with a
// cut and corner features. Deterministic per rng state.
Program generate_program(Complexity complexity, Rng& rng);

struct CommandResult {
    int exit_code = 0;
    std::string report; // single-line JSON for stdout
};

struct ReconstructOptions {
    std::string mesh_path;
    std::string config_path; // empty = defaults
    std::string out_dir = ".";
    std::optional<uint64_t> seed;
    std::optional<int> threads;
};
CommandResult cmd_reconstruct(const ReconstructOptions& opts);

struct EvalOptions {
    std::string pred_path; // program JSON or STL
    std::string gt_path;   // STL
    bool align = true;
};
CommandResult cmd_eval(const EvalOptions& opts);

struct GenerateOptions {
    int n = 1;
    Complexity complexity = Complexity::easy;
    uint64_t seed = 0;
    std::string out_dir = ".";
};
CommandResult cmd_generate(const GenerateOptions& opts);

// Report fragment shared by cmd_reconstruct and the acceptance suite.
std::string fit_report_to_json(const FitReport& report);

}  // namespace cadfit
