#include "cadfit/runner.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"cadfit: parametric CAD program reconstruction from triangle meshes"};
    app.require_subcommand(1);

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct", "Reconstruct a CAD program from an STL mesh");
    std::string mesh_path, config_path, out_dir = ".";
    std::optional<uint64_t> seed;
    std::optional<int> threads;
    rec->add_option("mesh", mesh_path, "input STL file")->required();
    rec->add_option("--config", config_path, "JSON config file");
    rec->add_option("--out", out_dir, "output directory");
    uint64_t seed_val = 0;
    auto* seed_opt = rec->add_option("--seed", seed_val, "manifest seed");
    int threads_val = 0;
    auto* threads_opt = rec->add_option("--threads", threads_val, "worker threads (0 = all cores)");

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a prediction against a ground-truth STL");
    std::string pred_path, gt_path;
    bool no_align = false;
    ev->add_option("--pred", pred_path, "predicted program JSON or STL")->required();
    ev->add_option("--gt", gt_path, "ground-truth STL")->required();
    ev->add_flag("--no-align", no_align, "skip similarity alignment");

    // gen
    auto* gen = app.add_subcommand("gen", "Generate synthetic program/STL benchmark pairs");
    int n = 1;
    std::string complexity = "easy";
    uint64_t gen_seed = 0;
    std::string gen_out = ".";
    gen->add_option("--n", n, "number of shapes")->required();
    gen->add_option("--complexity", complexity, "easy | medium | hard");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 3;
    }

    cadfit::CommandResult result;
    if (rec->parsed()) {
        cadfit::ReconstructOptions opts;
        opts.mesh_path = mesh_path;
        opts.config_path = config_path;
        opts.out_dir = out_dir;
        if (!seed_opt->empty()) opts.seed = seed_val;
        if (!threads_opt->empty()) opts.threads = threads_val;
        result = cadfit::cmd_reconstruct(opts);
    } else if (ev->parsed()) {
        cadfit::EvalOptions opts;
        opts.pred_path = pred_path;
        opts.gt_path = gt_path;
        opts.align = !no_align;
        result = cadfit::cmd_eval(opts);
    } else {
        cadfit::GenerateOptions opts;
        opts.n = n;
        try {
            opts.complexity = cadfit::complexity_from_name(complexity);
        } catch (const cadfit::Error& e) {
            std::fprintf(stderr, "%s\n", e.what());
            return 3;
        }
        opts.seed = gen_seed;
        opts.out_dir = gen_out;
        result = cadfit::cmd_generate(opts);
    }
    std::printf("%s\n", result.report.c_str());
    return result.exit_code;
}
