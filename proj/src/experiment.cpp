#include "ilgaco/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include "json.hpp"

#include "ilgaco/error.hpp"
#include "ilgaco/svg.hpp"

namespace ilgaco {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw_format(std::string(what) + ": " + e.what());
    }
}

void check_keys(const json& obj, const char* where, std::initializer_list<std::string_view> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            throw_validation(std::string(where) + ": unknown key '" + it.key() + "'");
        }
    }
}

const json& require_object(const json& j, const char* where) {
    if (!j.is_object()) {
        throw_validation(std::string(where) + " must be a JSON object");
    }
    return j;
}

double num_or(const json& obj, const char* key, double def, const char* where) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number()) {
        throw_validation(std::string(where) + ": '" + key + "' must be a number");
    }
    return v.get<double>();
}

uint64_t uint_or(const json& obj, const char* key, uint64_t def, const char* where) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) {
        throw_validation(std::string(where) + ": '" + key + "' must be a non-negative integer");
    }
    return v.get<uint64_t>();
}

bool bool_or(const json& obj, const char* key, bool def, const char* where) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
        throw_validation(std::string(where) + ": '" + key + "' must be a boolean");
    }
    return v.get<bool>();
}

std::string str_req(const json& obj, const char* key, const char* where) {
    if (!obj.contains(key)) {
        throw_validation(std::string(where) + ": missing required key '" + key + "'");
    }
    const json& v = obj.at(key);
    if (!v.is_string()) {
        throw_validation(std::string(where) + ": '" + key + "' must be a string");
    }
    return v.get<std::string>();
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw_validation("cannot open for writing: " + path.string());
    }
    file.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!file) {
        throw_validation("write failed: " + path.string());
    }
}

std::string read_text_file(const std::filesystem::path& path, const char* what) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw_validation(std::string("cannot open ") + what + ": " + path.string());
    }
    return std::string((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
}

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::string kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Viewpoints: return "viewpoints";
        case ExperimentKind::Conditions: return "conditions";
    }
    throw_usage("kind_name: bad enum value");
}

ExperimentKind kind_from_name(const std::string& name) {
    if (name == "viewpoints") return ExperimentKind::Viewpoints;
    if (name == "conditions") return ExperimentKind::Conditions;
    throw_validation("unknown experiment kind '" + name + "' (expected viewpoints or conditions)");
}

DatasetSpec dataset_spec_from_json(const std::string& text) {
    const json j = parse_json(text, "dataset spec");
    require_object(j, "dataset spec");
    check_keys(j, "dataset spec",
               {"num_subjects", "frame_dim", "frames_per_sequence", "train_sequences",
                "test_sequences", "noise_std", "seed", "viewpoints", "conditions"});

    DatasetSpec spec;
    spec.num_subjects = static_cast<uint32_t>(uint_or(j, "num_subjects", spec.num_subjects, "dataset spec"));
    spec.frame_dim = static_cast<uint32_t>(uint_or(j, "frame_dim", spec.frame_dim, "dataset spec"));
    spec.frames_per_sequence =
        static_cast<uint32_t>(uint_or(j, "frames_per_sequence", spec.frames_per_sequence, "dataset spec"));
    spec.train_sequences =
        static_cast<uint32_t>(uint_or(j, "train_sequences", spec.train_sequences, "dataset spec"));
    spec.test_sequences =
        static_cast<uint32_t>(uint_or(j, "test_sequences", spec.test_sequences, "dataset spec"));
    spec.noise_std = num_or(j, "noise_std", spec.noise_std, "dataset spec");
    spec.seed = uint_or(j, "seed", spec.seed, "dataset spec");

    std::vector<double> angles = {0.0, 45.0, 90.0, 135.0, 180.0};
    std::vector<std::string> conditions = {"nm", "bg", "cl"};
    if (j.contains("viewpoints")) {
        const json& arr = j.at("viewpoints");
        if (!arr.is_array()) throw_validation("dataset spec: 'viewpoints' must be an array of angles");
        angles.clear();
        for (const auto& v : arr) {
            if (!v.is_number()) throw_validation("dataset spec: viewpoint angles must be numbers");
            angles.push_back(v.get<double>());
        }
    }
    if (j.contains("conditions")) {
        const json& arr = j.at("conditions");
        if (!arr.is_array()) throw_validation("dataset spec: 'conditions' must be an array of labels");
        conditions.clear();
        for (const auto& v : arr) {
            if (!v.is_string()) throw_validation("dataset spec: condition labels must be strings");
            conditions.push_back(v.get<std::string>());
        }
    }
    uint32_t id = 0;
    for (double angle : angles) {
        spec.factors.push_back({id++, FactorKind::Viewpoint, angle, ""});
    }
    for (const auto& label : conditions) {
        spec.factors.push_back({id++, FactorKind::Condition, 0.0, label});
    }
    spec.validate();
    return spec;
}

std::string dataset_spec_to_json(const DatasetSpec& spec) {
    json j;
    j["num_subjects"] = spec.num_subjects;
    j["frame_dim"] = spec.frame_dim;
    j["frames_per_sequence"] = spec.frames_per_sequence;
    j["train_sequences"] = spec.train_sequences;
    j["test_sequences"] = spec.test_sequences;
    j["noise_std"] = spec.noise_std;
    j["seed"] = spec.seed;
    json viewpoints = json::array();
    json conditions = json::array();
    for (const auto& f : spec.factors) {
        if (f.kind == FactorKind::Viewpoint) {
            viewpoints.push_back(f.angle_deg);
        } else {
            conditions.push_back(f.label);
        }
    }
    j["viewpoints"] = viewpoints;
    j["conditions"] = conditions;
    return j.dump(2) + "\n";
}

namespace {

TrainConfig train_config_from_json(const json& j) {
    TrainConfig cfg;
    if (j.is_null()) return cfg;
    require_object(j, "train config");
    check_keys(j, "train config",
               {"iterations_main", "iterations_finetune", "lr_main", "lr_finetune", "batch_size",
                "memory_capacity", "seed", "loss", "augment"});
    cfg.iterations_main =
        static_cast<uint32_t>(uint_or(j, "iterations_main", cfg.iterations_main, "train config"));
    cfg.iterations_finetune =
        static_cast<uint32_t>(uint_or(j, "iterations_finetune", cfg.iterations_finetune, "train config"));
    cfg.lr_main = num_or(j, "lr_main", cfg.lr_main, "train config");
    cfg.lr_finetune = num_or(j, "lr_finetune", cfg.lr_finetune, "train config");
    cfg.batch_size = static_cast<uint32_t>(uint_or(j, "batch_size", cfg.batch_size, "train config"));
    cfg.memory_capacity = uint_or(j, "memory_capacity", cfg.memory_capacity, "train config");
    cfg.seed = uint_or(j, "seed", cfg.seed, "train config");
    if (j.contains("loss")) {
        const json& l = require_object(j.at("loss"), "loss config");
        check_keys(l, "loss config", {"temperature", "distill_scale", "average_over_masked"});
        cfg.loss.temperature = num_or(l, "temperature", cfg.loss.temperature, "loss config");
        cfg.loss.distill_scale = num_or(l, "distill_scale", cfg.loss.distill_scale, "loss config");
        cfg.loss.average_over_masked =
            bool_or(l, "average_over_masked", cfg.loss.average_over_masked, "loss config");
    }
    if (j.contains("augment")) {
        const json& a = require_object(j.at("augment"), "augment config");
        check_keys(a, "augment config", {"gaussian_noise_std", "frame_dropout_prob", "temporal_shift_max"});
        cfg.augment.gaussian_noise_std =
            num_or(a, "gaussian_noise_std", cfg.augment.gaussian_noise_std, "augment config");
        cfg.augment.frame_dropout_prob =
            num_or(a, "frame_dropout_prob", cfg.augment.frame_dropout_prob, "augment config");
        cfg.augment.temporal_shift_max = static_cast<uint32_t>(
            uint_or(a, "temporal_shift_max", cfg.augment.temporal_shift_max, "augment config"));
    }
    return cfg;
}

json train_config_to_json(const TrainConfig& cfg) {
    json j;
    j["iterations_main"] = cfg.iterations_main;
    j["iterations_finetune"] = cfg.iterations_finetune;
    j["lr_main"] = cfg.lr_main;
    j["lr_finetune"] = cfg.lr_finetune;
    j["batch_size"] = cfg.batch_size;
    j["memory_capacity"] = cfg.memory_capacity;
    j["seed"] = cfg.seed;
    j["loss"] = {{"temperature", cfg.loss.temperature},
                 {"distill_scale", cfg.loss.distill_scale},
                 {"average_over_masked", cfg.loss.average_over_masked}};
    j["augment"] = {{"gaussian_noise_std", cfg.augment.gaussian_noise_std},
                    {"frame_dropout_prob", cfg.augment.frame_dropout_prob},
                    {"temporal_shift_max", cfg.augment.temporal_shift_max}};
    return j;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const std::string& text,
                                             const std::filesystem::path& base_dir) {
    const json j = parse_json(text, "experiment config");
    require_object(j, "experiment config");
    check_keys(j, "experiment config", {"dataset", "kind", "method", "factor_order", "train", "out_dir"});

    ExperimentConfig cfg;
    if (!j.contains("dataset")) {
        throw_validation("experiment config: missing required key 'dataset'");
    }
    const json& d = require_object(j.at("dataset"), "experiment config dataset");
    check_keys(d, "experiment config dataset", {"path", "spec"});
    if (d.contains("path") == d.contains("spec")) {
        throw_validation("experiment config dataset: give exactly one of 'path' or 'spec'");
    }
    if (d.contains("path")) {
        std::filesystem::path p = str_req(d, "path", "experiment config dataset");
        cfg.dataset_path = p.is_absolute() ? p : base_dir / p;
    } else {
        cfg.dataset_spec = dataset_spec_from_json(d.at("spec").dump());
    }

    cfg.kind = kind_from_name(str_req(j, "kind", "experiment config"));
    cfg.method = method_from_name(str_req(j, "method", "experiment config"));

    if (j.contains("factor_order")) {
        const json& arr = j.at("factor_order");
        if (!arr.is_array()) {
            throw_validation("experiment config: 'factor_order' must be an array of factor ids");
        }
        for (const auto& v : arr) {
            if (!v.is_number_unsigned()) {
                throw_validation("experiment config: factor ids must be non-negative integers");
            }
            cfg.factor_order.push_back(v.get<uint32_t>());
        }
    }
    cfg.train = train_config_from_json(j.contains("train") ? j.at("train") : json());
    cfg.train.validate();
    if (j.contains("out_dir")) {
        cfg.out_dir = str_req(j, "out_dir", "experiment config");
    }
    return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
    json j;
    if (config.dataset_spec.has_value()) {
        j["dataset"]["spec"] = parse_json(dataset_spec_to_json(*config.dataset_spec), "spec echo");
    } else {
        j["dataset"]["path"] = config.dataset_path.string();
    }
    j["kind"] = kind_name(config.kind);
    j["method"] = method_name(config.method);
    j["factor_order"] = config.factor_order;
    j["train"] = train_config_to_json(config.train);
    j["out_dir"] = config.out_dir.string();
    return j.dump(2) + "\n";
}

std::string dataset_checksum(const Dataset& dataset) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "fnv1a-%016llx",
                  static_cast<unsigned long long>(fnv1a64(serialize_dataset(dataset))));
    return buf;
}

std::string report_to_json(const ExperimentConfig& config, const Dataset& dataset,
                           const MethodRunResult& result) {
    json j;
    j["method"] = method_name(result.method);
    j["kind"] = kind_name(config.kind);
    j["dataset_checksum"] = dataset_checksum(dataset);
    j["memory_capacity"] = config.train.memory_capacity;
    j["seed"] = config.train.seed;
    j["factor_order"] = result.factor_order;
    j["eval_factors"] = result.trajectory.eval_factors;

    json factor_names = json::array();
    for (uint32_t id : result.trajectory.eval_factors) {
        factor_names.push_back(dataset.spec.factor(id).display_name());
    }
    j["factor_names"] = factor_names;

    json step_names = json::array();
    if (result.method == Method::Joint) {
        step_names.push_back("all");
    } else {
        for (uint32_t id : result.trajectory.step_factors) {
            step_names.push_back(dataset.spec.factor(id).display_name());
        }
    }
    j["step_names"] = step_names;

    json steps = json::array();
    for (size_t i = 0; i < result.reports.size(); ++i) {
        const EvalReport& r = result.reports[i];
        json s;
        s["step"] = i;
        s["added_factor"] = result.trajectory.step_factors[i];
        s["rank1"] = r.rank1_pct;
        s["video_counts"] = r.video_counts;
        s["average"] = r.average;
        steps.push_back(std::move(s));
    }
    j["steps"] = std::move(steps);

    j["trajectory"] = {{"factors", result.trajectory.eval_factors},
                       {"step_factors", result.trajectory.step_factors},
                       {"rows", result.trajectory.rows}};
    j["final_average"] = result.final_average;
    return j.dump(2) + "\n";
}

namespace {

std::vector<std::string> step_display_names(const ExperimentConfig& config, const Dataset& dataset,
                                            const MethodRunResult& result) {
    std::vector<std::string> names;
    if (result.method == Method::Joint) {
        names.push_back("all");
        return names;
    }
    for (uint32_t id : result.trajectory.step_factors) {
        names.push_back(dataset.spec.factor(id).display_name());
    }
    (void)config;
    return names;
}

std::string table1_csv(const ExperimentConfig& config, const Dataset& dataset,
                       const MethodRunResult& result) {
    const std::vector<std::string> steps = step_display_names(config, dataset, result);
    std::string out = "run";
    for (const auto& s : steps) out += ",after:" + s;
    out += "\n";
    out += kind_name(config.kind) + "/" + method_name(result.method);
    for (const auto& r : result.reports) out += "," + fmt17(r.average);
    out += "\n";
    return out;
}

std::string table2_csv(const ExperimentConfig& config, const Dataset& dataset,
                       const MethodRunResult& result) {
    const std::vector<std::string> steps = step_display_names(config, dataset, result);
    std::string out = "test_factor";
    for (const auto& s : steps) out += ",after:" + s;
    out += "\n";
    const auto& traj = result.trajectory;
    for (size_t f = 0; f < traj.eval_factors.size(); ++f) {
        out += dataset.spec.factor(traj.eval_factors[f]).display_name();
        for (size_t step = 0; step < traj.rows.size(); ++step) {
            out += "," + fmt17(traj.rows[step][f]);
        }
        out += "\n";
    }
    out += "average";
    for (size_t step = 0; step < traj.rows.size(); ++step) {
        out += "," + fmt17(result.reports[step].average);
    }
    out += "\n";
    return out;
}

std::string trajectory_svg(const ExperimentConfig& config, const Dataset& dataset,
                           const MethodRunResult& result) {
    const auto& traj = result.trajectory;
    std::vector<std::string> factor_names;
    for (uint32_t id : traj.eval_factors) {
        factor_names.push_back(dataset.spec.factor(id).display_name());
    }
    std::vector<std::vector<double>> series(traj.eval_factors.size(),
                                            std::vector<double>(traj.rows.size()));
    for (size_t step = 0; step < traj.rows.size(); ++step) {
        for (size_t f = 0; f < traj.eval_factors.size(); ++f) {
            series[f][step] = traj.rows[step][f];
        }
    }
    const std::string title = kind_name(config.kind) + " / " + method_name(result.method);
    return line_chart_svg(title, step_display_names(config, dataset, result), factor_names, series,
                          std::nullopt);
}

}  // namespace

RunArtifacts execute_run(const ExperimentConfig& config_in) {
    ExperimentConfig config = config_in;
    config.train.validate();

    Dataset dataset = config.dataset_spec.has_value() ? generate_dataset(*config.dataset_spec)
                                                      : load_dataset(config.dataset_path);

    const FactorKind want =
        config.kind == ExperimentKind::Viewpoints ? FactorKind::Viewpoint : FactorKind::Condition;
    const std::vector<uint32_t> kind_factors = dataset.spec.factor_ids(want);
    if (config.factor_order.empty()) {
        config.factor_order = kind_factors;
    } else {
        for (uint32_t id : config.factor_order) {
            if (std::find(kind_factors.begin(), kind_factors.end(), id) == kind_factors.end()) {
                throw_validation("factor " + std::to_string(id) + " is not a " + kind_name(config.kind) +
                                 " factor of this dataset");
            }
        }
    }
    if (config.factor_order.empty()) {
        throw_validation("dataset has no " + kind_name(config.kind) + " factors");
    }

    MethodRunResult result = run_method(dataset, config.method, config.factor_order, config.train);

    std::filesystem::create_directories(config.out_dir);
    RunArtifacts art;
    art.report_json = config.out_dir / "report.json";
    write_text_file(art.report_json, report_to_json(config, dataset, result));
    art.config_echo = config.out_dir / "config_echo.json";
    write_text_file(art.config_echo, experiment_config_to_json(config));
    art.table1_csv = config.out_dir / "table1.csv";
    write_text_file(art.table1_csv, table1_csv(config, dataset, result));
    art.table2_csv = config.out_dir / "table2.csv";
    write_text_file(art.table2_csv, table2_csv(config, dataset, result));
    art.trajectory_svg = config.out_dir / "trajectory.svg";
    write_text_file(art.trajectory_svg, trajectory_svg(config, dataset, result));
    art.model_file = config.out_dir / "model.ilgm";
    save_model(*result.model, art.model_file);
    if (result.memory.has_value()) {
        art.memory_file = config.out_dir / "memory.ilge";
        save_memory(*result.memory, art.memory_file);
    }
    art.result = std::move(result);
    return art;
}

LoadedReport load_report(const std::filesystem::path& report_json) {
    const json j = parse_json(read_text_file(report_json, "report"), "report");
    require_object(j, "report");

    LoadedReport rep;
    rep.method = str_req(j, "method", "report");
    rep.kind = str_req(j, "kind", "report");
    rep.dataset_checksum = str_req(j, "dataset_checksum", "report");
    if (!j.contains("final_average") || !j.at("final_average").is_number()) {
        throw_validation("report: missing numeric 'final_average'");
    }
    rep.final_average = j.at("final_average").get<double>();

    for (const char* key : {"factor_names", "step_names"}) {
        if (!j.contains(key) || !j.at(key).is_array()) {
            throw_validation(std::string("report: missing array '") + key + "'");
        }
    }
    for (const auto& v : j.at("factor_names")) rep.factor_names.push_back(v.get<std::string>());
    for (const auto& v : j.at("step_names")) rep.step_names.push_back(v.get<std::string>());

    if (!j.contains("trajectory") || !j.at("trajectory").is_object() ||
        !j.at("trajectory").contains("rows")) {
        throw_validation("report: missing trajectory matrix");
    }
    for (const auto& row : j.at("trajectory").at("rows")) {
        std::vector<double> r;
        for (const auto& v : row) {
            if (!v.is_number()) throw_validation("report: trajectory entries must be numbers");
            r.push_back(v.get<double>());
        }
        if (r.size() != rep.factor_names.size()) {
            throw_validation("report: trajectory row width != factor count");
        }
        rep.trajectory.push_back(std::move(r));
    }
    if (rep.trajectory.size() != rep.step_names.size()) {
        throw_validation("report: trajectory row count != step count");
    }
    return rep;
}

void write_compare_artifacts(const std::vector<LoadedReport>& reports,
                             const std::filesystem::path& out_dir) {
    if (reports.size() < 2) {
        throw_validation("compare needs at least two runs");
    }
    for (const auto& r : reports) {
        if (r.dataset_checksum != reports.front().dataset_checksum) {
            throw_validation("compare: runs use different datasets (" + r.dataset_checksum + " vs " +
                             reports.front().dataset_checksum + ")");
        }
    }

    std::vector<std::string> kinds;
    std::vector<std::string> methods;
    for (const auto& r : reports) {
        if (std::find(kinds.begin(), kinds.end(), r.kind) == kinds.end()) kinds.push_back(r.kind);
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
            methods.push_back(r.method);
        }
    }

    std::vector<std::vector<double>> values(kinds.size(), std::vector<double>(methods.size()));
    for (size_t g = 0; g < kinds.size(); ++g) {
        for (size_t s = 0; s < methods.size(); ++s) {
            const LoadedReport* found = nullptr;
            for (const auto& r : reports) {
                if (r.kind == kinds[g] && r.method == methods[s]) {
                    if (found != nullptr) {
                        throw_validation("compare: duplicate run for " + kinds[g] + "/" + methods[s]);
                    }
                    found = &r;
                }
            }
            if (found == nullptr) {
                throw_validation("compare: no run for " + kinds[g] + "/" + methods[s]);
            }
            values[g][s] = found->final_average;
        }
    }

    std::filesystem::create_directories(out_dir);
    std::string csv = "kind";
    for (const auto& m : methods) csv += "," + m;
    csv += "\n";
    for (size_t g = 0; g < kinds.size(); ++g) {
        csv += kinds[g];
        for (size_t s = 0; s < methods.size(); ++s) csv += "," + fmt17(values[g][s]);
        csv += "\n";
    }
    write_text_file(out_dir / "compare.csv", csv);
    write_text_file(out_dir / "compare.svg",
                    grouped_bar_svg("Final average Rank-1 by method", kinds, methods, values));
}

void write_plot(const LoadedReport& report, std::optional<double> upper_bound,
                const std::filesystem::path& out_path) {
    std::vector<std::vector<double>> series(report.factor_names.size(),
                                            std::vector<double>(report.trajectory.size()));
    for (size_t step = 0; step < report.trajectory.size(); ++step) {
        for (size_t f = 0; f < report.factor_names.size(); ++f) {
            series[f][step] = report.trajectory[step][f];
        }
    }
    const std::string title = report.kind + " / " + report.method;
    write_text_file(out_path, line_chart_svg(title, report.step_names, report.factor_names, series,
                                             upper_bound));
}

}  // namespace ilgaco
