#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ilgaco/dataset.hpp"
#include "ilgaco/error.hpp"
#include "ilgaco/experiment.hpp"

namespace fs = std::filesystem;

namespace {

// Exit codes: 0 success, 2 configuration/validation problems, 3 numeric or
// other runtime failures.
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string read_file(const fs::path& path, const char* what) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        ilgaco::throw_validation(std::string("cannot open ") + what + ": " + path.string());
    }
    return std::string((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
}

int cmd_generate(const std::string& spec_path, const std::string& out_path,
                 std::optional<uint64_t> seed) {
    ilgaco::DatasetSpec spec = spec_path.empty()
                                   ? ilgaco::DatasetSpec::defaults()
                                   : ilgaco::dataset_spec_from_json(read_file(spec_path, "spec file"));
    if (seed.has_value()) spec.seed = *seed;

    const ilgaco::Dataset dataset = ilgaco::generate_dataset(spec);
    ilgaco::save_dataset(dataset, out_path);

    std::printf("wrote %s\n", out_path.c_str());
    std::printf("  subjects: %u\n", spec.num_subjects);
    std::printf("  factors:  %zu\n", spec.factors.size());
    for (const auto& f : spec.factors) {
        const auto train = dataset.train_of(f.id);
        size_t train_windows = 0;
        for (const auto* seq : train) train_windows += ilgaco::window_sequence(*seq).size();
        std::printf("    %-4s %zu train sequences, %zu train windows, %zu test sequences\n",
                    f.display_name().c_str(), train.size(), train_windows,
                    dataset.test_of(f.id).size());
    }
    std::printf("  sequences: %zu, seed %llu\n", dataset.sequences.size(),
                static_cast<unsigned long long>(spec.seed));
    return 0;
}

ilgaco::ExperimentConfig load_config(const std::string& config_path, const std::string& out_override,
                                     std::optional<uint64_t> seed) {
    const fs::path path(config_path);
    ilgaco::ExperimentConfig config =
        ilgaco::experiment_config_from_json(read_file(path, "config file"), path.parent_path());
    if (!out_override.empty()) config.out_dir = out_override;
    if (seed.has_value()) config.train.seed = *seed;
    return config;
}

int cmd_run(const std::string& config_path, const std::string& out_override,
            std::optional<uint64_t> seed) {
    const ilgaco::ExperimentConfig config = load_config(config_path, out_override, seed);
    const ilgaco::RunArtifacts art = ilgaco::execute_run(config);

    std::printf("%s / %s over %zu factors\n", ilgaco::kind_name(config.kind).c_str(),
                ilgaco::method_name(art.result.method).c_str(), art.result.factor_order.size());
    for (size_t i = 0; i < art.result.reports.size(); ++i) {
        std::printf("  step %zu: average Rank-1 %.2f%%\n", i, art.result.reports[i].average);
    }
    std::printf("final average Rank-1: %.2f%%\n", art.result.final_average);
    std::printf("artifacts in %s\n", config.out_dir.string().c_str());
    return 0;
}

int cmd_compare(const std::vector<std::string>& config_paths, const std::string& out_dir,
                std::optional<uint64_t> seed) {
    std::vector<ilgaco::LoadedReport> reports;
    for (const auto& path : config_paths) {
        const ilgaco::ExperimentConfig config = load_config(path, "", seed);
        const fs::path report_path = config.out_dir / "report.json";
        if (!fs::exists(report_path)) {
            std::printf("running %s...\n", path.c_str());
            ilgaco::execute_run(config);
        }
        reports.push_back(ilgaco::load_report(report_path));
    }
    ilgaco::write_compare_artifacts(reports, out_dir);
    for (const auto& r : reports) {
        std::printf("  %s/%s: final average Rank-1 %.2f%%\n", r.kind.c_str(), r.method.c_str(),
                    r.final_average);
    }
    std::printf("comparison artifacts in %s\n", out_dir.c_str());
    return 0;
}

int cmd_plot(const std::string& report_path, const std::string& out_path,
             const std::string& upper_bound_report) {
    const ilgaco::LoadedReport report = ilgaco::load_report(report_path);
    std::optional<double> upper_bound;
    if (!upper_bound_report.empty()) {
        upper_bound = ilgaco::load_report(upper_bound_report).final_average;
    }
    ilgaco::write_plot(report, upper_bound, out_path);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Incremental gait-covariate learning harness"};
    app.require_subcommand(1);

    std::string spec_path, out_path, config_path, report_path, upper_bound_report;
    std::vector<std::string> config_paths;
    std::optional<uint64_t> seed;

    CLI::App* generate = app.add_subcommand("generate", "Generate a synthetic dataset file");
    generate->add_option("--spec", spec_path, "Dataset spec JSON (defaults used when omitted)");
    generate->add_option("--out", out_path, "Output dataset path")->required();
    generate->add_option("--seed", seed, "Override the spec seed");

    CLI::App* run = app.add_subcommand("run", "Run one experiment config");
    run->add_option("--config", config_path, "Experiment config JSON")->required();
    run->add_option("--out", out_path, "Override the config's output directory");
    run->add_option("--seed", seed, "Override the config's training seed");

    CLI::App* compare = app.add_subcommand("compare", "Compare several finished or runnable configs");
    compare->add_option("--config", config_paths, "Experiment config JSON (repeatable)")
        ->required()
        ->expected(-2);
    compare->add_option("--out", out_path, "Comparison output directory")->required();
    compare->add_option("--seed", seed, "Override every config's training seed");

    CLI::App* plot = app.add_subcommand("plot", "Render a run's trajectory as SVG");
    plot->add_option("--report", report_path, "report.json from a finished run")->required();
    plot->add_option("--out", out_path, "Output SVG path")->required();
    plot->add_option("--upper-bound", upper_bound_report, "joint run report.json for the UB line");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (generate->parsed()) return cmd_generate(spec_path, out_path, seed);
        if (run->parsed()) return cmd_run(config_path, out_path, seed);
        if (compare->parsed()) return cmd_compare(config_paths, out_path, seed);
        if (plot->parsed()) return cmd_plot(report_path, out_path, upper_bound_report);
    } catch (const ilgaco::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.kind() == ilgaco::ErrorKind::Numeric ? kExitRuntime : kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitConfig;
}
