#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ilgaco/baselines.hpp"
#include "ilgaco/dataset.hpp"
#include "ilgaco/trainer.hpp"

namespace ilgaco {

// Which family of covariate factors a run learns incrementally.
enum class ExperimentKind { Viewpoints, Conditions };

std::string kind_name(ExperimentKind kind);
ExperimentKind kind_from_name(const std::string& name);  // Validation on unknown names

struct ExperimentConfig {
    // Exactly one of these describes the data: a dataset file, or an
    // inline spec generated on the fly.
    std::filesystem::path dataset_path;
    std::optional<DatasetSpec> dataset_spec;

    ExperimentKind kind = ExperimentKind::Viewpoints;
    Method method = Method::Ilgaco;
    std::vector<uint32_t> factor_order;  // empty = all factors of the kind, dataset order
    TrainConfig train;
    std::filesystem::path out_dir = "run_out";
};

// JSON <-> structs. Unknown keys are rejected so config typos fail loudly
// instead of silently running defaults. Relative dataset paths resolve
// against base_dir (the config file's directory).
ExperimentConfig experiment_config_from_json(const std::string& text,
                                             const std::filesystem::path& base_dir);
std::string experiment_config_to_json(const ExperimentConfig& config);

DatasetSpec dataset_spec_from_json(const std::string& text);
std::string dataset_spec_to_json(const DatasetSpec& spec);

// FNV-1a over the dataset's serialized bytes; lets compare refuse to mix
// runs from different datasets.
std::string dataset_checksum(const Dataset& dataset);

// Everything one run writes into its output directory.
struct RunArtifacts {
    std::filesystem::path report_json;
    std::filesystem::path table1_csv;
    std::filesystem::path table2_csv;
    std::filesystem::path trajectory_svg;
    std::filesystem::path model_file;
    std::filesystem::path memory_file;  // empty when the method stores no exemplars
    std::filesystem::path config_echo;
    MethodRunResult result;
};

// Loads or generates the dataset, resolves the factor order, runs the
// method, and writes every artifact. Pure function of (dataset bytes,
// config): rerunning produces byte-identical files.
RunArtifacts execute_run(const ExperimentConfig& config);

// Stable report bytes for a finished run.
std::string report_to_json(const ExperimentConfig& config, const Dataset& dataset,
                           const MethodRunResult& result);

// The subset of a report that compare/plot need back.
struct LoadedReport {
    std::string method;
    std::string kind;
    double final_average = 0.0;
    std::vector<std::string> factor_names;  // eval factors, display names
    std::vector<std::string> step_names;    // added factor per step
    std::vector<std::vector<double>> trajectory;  // [step][factor]
    std::string dataset_checksum;
};

LoadedReport load_report(const std::filesystem::path& report_json);

// compare.csv + compare.svg: one bar group per experiment kind, one bar
// per method. All reports must share a dataset checksum.
void write_compare_artifacts(const std::vector<LoadedReport>& reports,
                             const std::filesystem::path& out_dir);

// Line chart of a single run's trajectory, optionally with a joint-run
// upper-bound line.
void write_plot(const LoadedReport& report, std::optional<double> upper_bound,
                const std::filesystem::path& out_path);

}  // namespace ilgaco
