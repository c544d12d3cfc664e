#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "doctest.h"
#include "ilgaco/dataset.hpp"
#include "ilgaco/experiment.hpp"
#include "test_util.hpp"

using namespace ilgaco;

namespace {

namespace fs = std::filesystem;

fs::path tmp_dir(const std::string& leaf) {
    const auto dir = fs::temp_directory_path() / "ilgaco_cli_test" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    REQUIRE(f.good());
    f << text;
}

struct CmdResult {
    int code = -1;
    std::string out;
    std::string err;
};

// Runs the installed binary through the shell, capturing exit code and both
// streams. `shell_prefix` text goes in front of the binary, e.g. to set
// environment variables ("VAR=value ") or change directory ("cd x && ").
CmdResult run_cli(const std::string& args, const std::string& shell_prefix = "") {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() / "ilgaco_cli_test";
    fs::create_directories(dir);
    const fs::path out_file = dir / ("stdout." + std::to_string(counter));
    const fs::path err_file = dir / ("stderr." + std::to_string(counter));
    ++counter;

    const std::string cmd = shell_prefix + std::string(ILGACO_CLI_BIN) + " " + args + " > " +
                            out_file.string() + " 2> " + err_file.string();
    const int status = std::system(cmd.c_str());

    CmdResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out_file);
    r.err = read_file(err_file);
    return r;
}

bool xml_well_formed(const fs::path& path) {
    const std::string cmd =
        "python3 -c 'import sys, xml.dom.minidom; xml.dom.minidom.parse(sys.argv[1])' " +
        path.string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

TrainConfig tiny_train_config() {
    TrainConfig cfg;
    cfg.iterations_main = 25;
    cfg.iterations_finetune = 10;
    cfg.batch_size = 8;
    cfg.memory_capacity = 16;
    cfg.seed = 5;
    return cfg;
}

// Writes an experiment config file with the tiny inline dataset spec and
// returns its path.
fs::path write_config(const fs::path& dir, const std::string& name, ExperimentKind kind,
                      Method method, std::vector<uint32_t> order, const fs::path& out_dir) {
    ExperimentConfig cfg;
    cfg.dataset_spec = test_util::tiny_spec();
    cfg.kind = kind;
    cfg.method = method;
    cfg.factor_order = std::move(order);
    cfg.train = tiny_train_config();
    cfg.out_dir = out_dir;
    const fs::path path = dir / name;
    write_file(path, experiment_config_to_json(cfg));
    return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("argument errors exit with the configuration code") {
    CHECK(run_cli("").code == 2);                       // a subcommand is required
    CHECK(run_cli("frobnicate").code == 2);             // unknown subcommand
    CHECK(run_cli("run").code == 2);                    // missing --config
    CHECK(run_cli("generate").code == 2);               // missing --out
    CHECK(run_cli("plot --report x.json").code == 2);   // missing --out
    CHECK(run_cli("run --config a.json --bogus").code == 2);

    const CmdResult help = run_cli("--help");
    CHECK(help.code == 0);
    for (const char* sub : {"generate", "run", "compare", "plot"}) {
        CHECK(help.out.find(sub) != std::string::npos);
    }
}

TEST_CASE("generate writes a loadable dataset and honors seed overrides") {
    const auto dir = tmp_dir("generate");
    write_file(dir / "tiny.json", dataset_spec_to_json(test_util::tiny_spec()));

    const CmdResult first = run_cli("generate --spec " + (dir / "tiny.json").string() + " --out " +
                                    (dir / "a.ilgc").string());
    CHECK(first.code == 0);
    CHECK(first.out.find("subjects: 4") != std::string::npos);
    CHECK(first.out.find("090") != std::string::npos);  // per-factor summary lines

    // Loadable by the library, hence by `run`.
    const Dataset loaded = load_dataset(dir / "a.ilgc");
    CHECK(loaded.spec.num_subjects == 4);
    CHECK(loaded.spec.factors.size() == 3);

    // Same spec, same bytes.
    CHECK(run_cli("generate --spec " + (dir / "tiny.json").string() + " --out " +
                  (dir / "b.ilgc").string())
              .code == 0);
    CHECK(read_file(dir / "a.ilgc") == read_file(dir / "b.ilgc"));

    // A seed override changes the data and matches an in-spec seed change.
    CHECK(run_cli("generate --spec " + (dir / "tiny.json").string() + " --seed 123 --out " +
                  (dir / "c.ilgc").string())
              .code == 0);
    CHECK(read_file(dir / "c.ilgc") != read_file(dir / "a.ilgc"));
    DatasetSpec reseeded = test_util::tiny_spec();
    reseeded.seed = 123;
    write_file(dir / "tiny123.json", dataset_spec_to_json(reseeded));
    CHECK(run_cli("generate --spec " + (dir / "tiny123.json").string() + " --out " +
                  (dir / "d.ilgc").string())
              .code == 0);
    CHECK(read_file(dir / "c.ilgc") == read_file(dir / "d.ilgc"));

    // The built-in default spec works without a spec file.
    const CmdResult defaults =
        run_cli("generate --out " + (dir / "default.ilgc").string());
    CHECK(defaults.code == 0);
    CHECK(defaults.out.find("subjects: 20") != std::string::npos);
    CHECK(load_dataset(dir / "default.ilgc").spec.factors.size() == 8);
}

TEST_CASE("generate rejects malformed specs without leaving partial output") {
    const auto dir = tmp_dir("generate_bad");
    write_file(dir / "broken.json", "{\"num_subjects\": ");
    const CmdResult r = run_cli("generate --spec " + (dir / "broken.json").string() + " --out " +
                                (dir / "out.ilgc").string());
    CHECK(r.code == 2);
    CHECK(r.err.find("error:") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out.ilgc"));

    write_file(dir / "typo.json", R"({"num_subjectss": 4})");
    CHECK(run_cli("generate --spec " + (dir / "typo.json").string() + " --out " +
                  (dir / "out.ilgc").string())
              .code == 2);
    CHECK_FALSE(fs::exists(dir / "out.ilgc"));
}

TEST_CASE("run executes a config and reruns byte-identically") {
    const auto dir = tmp_dir("run");
    const fs::path config = write_config(dir, "exp.json", ExperimentKind::Viewpoints,
                                         Method::Ilgaco, {0, 1}, dir / "out_a");

    const CmdResult r = run_cli("run --config " + config.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("viewpoints / ilgaco over 2 factors") != std::string::npos);
    CHECK(r.out.find("final average Rank-1") != std::string::npos);
    for (const char* name : {"report.json", "table1.csv", "table2.csv", "trajectory.svg",
                             "model.ilgm", "memory.ilge", "config_echo.json"}) {
        CAPTURE(name);
        CHECK(fs::exists(dir / "out_a" / name));
    }
    CHECK(xml_well_formed(dir / "out_a" / "trajectory.svg"));

    // --out overrides the config's directory; same inputs, same bytes.
    CHECK(run_cli("run --config " + config.string() + " --out " + (dir / "out_b").string())
              .code == 0);
    CHECK(read_file(dir / "out_b" / "report.json") == read_file(dir / "out_a" / "report.json"));
    CHECK(read_file(dir / "out_b" / "model.ilgm") == read_file(dir / "out_a" / "model.ilgm"));
    CHECK(read_file(dir / "out_b" / "memory.ilge") == read_file(dir / "out_a" / "memory.ilge"));

    // A seed override really reaches the training run.
    CHECK(run_cli("run --config " + config.string() + " --seed 99 --out " +
                  (dir / "out_c").string())
              .code == 0);
    CHECK(read_file(dir / "out_c" / "report.json") != read_file(dir / "out_a" / "report.json"));
}

TEST_CASE("run accepts a dataset by path, resolved against the config directory") {
    const auto dir = tmp_dir("run_path");
    write_file(dir / "tiny.json", dataset_spec_to_json(test_util::tiny_spec()));
    REQUIRE(run_cli("generate --spec " + (dir / "tiny.json").string() + " --out " +
                    (dir / "data.ilgc").string())
                .code == 0);

    ExperimentConfig cfg;
    cfg.dataset_path = "data.ilgc";  // relative to the config file
    cfg.kind = ExperimentKind::Conditions;
    cfg.method = Method::Joint;
    cfg.train = tiny_train_config();
    cfg.out_dir = (dir / "out").string();
    write_file(dir / "exp.json", experiment_config_to_json(cfg));

    const CmdResult r = run_cli("run --config " + (dir / "exp.json").string());
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "out" / "report.json"));
    CHECK_FALSE(fs::exists(dir / "out" / "memory.ilge"));  // joint stores nothing

    // The same config from elsewhere still finds the dataset.
    const CmdResult again = run_cli("run --config exp.json --out out2",
                                    "cd " + dir.string() + " && ");
    CHECK(again.code == 0);
}

TEST_CASE("run failures use exit 2 for bad configs and 3 for numeric blowups") {
    const auto dir = tmp_dir("run_bad");
    write_file(dir / "broken.json", "not json at all");
    CmdResult r = run_cli("run --config " + (dir / "broken.json").string());
    CHECK(r.code == 2);
    CHECK(r.err.find("error:") != std::string::npos);

    write_file(dir / "missing_data.json", R"({"dataset": {"path": "nope.ilgc"},
        "kind": "viewpoints", "method": "ilgaco"})");
    CHECK(run_cli("run --config " + (dir / "missing_data.json").string()).code == 2);

    const fs::path config = write_config(dir, "order.json", ExperimentKind::Viewpoints,
                                         Method::Ilgaco, {0, 2}, dir / "out");
    CHECK(run_cli("run --config " + config.string()).code == 2);  // 2 is a condition factor

    // An absurd learning rate overflows the logits to infinity on the
    // second iteration; that is a numeric failure, not a config one. (It
    // takes ~1e105 — parameters pass through three multiplies, so the
    // logits grow with the cube of the step size, and only past ~1e308 do
    // they stop being representable.)
    ExperimentConfig blowup;
    blowup.dataset_spec = test_util::tiny_spec();
    blowup.kind = ExperimentKind::Viewpoints;
    blowup.method = Method::Ilgaco;
    blowup.factor_order = {0, 1};
    blowup.train = tiny_train_config();
    blowup.train.lr_main = 1e105;
    blowup.train.lr_finetune = 1e104;
    blowup.out_dir = (dir / "out_blowup").string();
    write_file(dir / "blowup.json", experiment_config_to_json(blowup));
    r = run_cli("run --config " + (dir / "blowup.json").string());
    CHECK(r.code == 3);
    CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("the kernel backend override does not change run artifacts") {
    const auto dir = tmp_dir("run_kernels");
    const fs::path config = write_config(dir, "exp.json", ExperimentKind::Viewpoints,
                                         Method::Ilgaco, {0, 1}, dir / "out_default");

    REQUIRE(run_cli("run --config " + config.string()).code == 0);
    REQUIRE(run_cli("run --config " + config.string() + " --out " + (dir / "out_scalar").string(),
                    "ILGACO_KERNELS=scalar ")
                .code == 0);
    CHECK(read_file(dir / "out_scalar" / "report.json") ==
          read_file(dir / "out_default" / "report.json"));
    CHECK(read_file(dir / "out_scalar" / "model.ilgm") ==
          read_file(dir / "out_default" / "model.ilgm"));

    // An unknown backend name in the environment falls back to the default
    // with a warning instead of killing the run; requesting a specific
    // backend strictly is the in-process select() API's job.
    const CmdResult fallback =
        run_cli("run --config " + config.string() + " --out " + (dir / "out_fallback").string(),
                "ILGACO_KERNELS=sse9 ");
    CHECK(fallback.code == 0);
    CHECK(fallback.err.find("ILGACO_KERNELS=sse9 not available") != std::string::npos);
    CHECK(read_file(dir / "out_fallback" / "report.json") ==
          read_file(dir / "out_default" / "report.json"));
}

TEST_CASE("compare runs missing configs, caches reports and emits the cross table") {
    const auto dir = tmp_dir("compare");
    const fs::path cv_i = write_config(dir, "v_ilgaco.json", ExperimentKind::Viewpoints,
                                       Method::Ilgaco, {0, 1}, dir / "v_ilgaco");
    const fs::path cv_l = write_config(dir, "v_lwf.json", ExperimentKind::Viewpoints,
                                       Method::Lwf, {0, 1}, dir / "v_lwf");
    const fs::path cc_i = write_config(dir, "c_ilgaco.json", ExperimentKind::Conditions,
                                       Method::Ilgaco, {2}, dir / "c_ilgaco");
    const fs::path cc_l = write_config(dir, "c_lwf.json", ExperimentKind::Conditions,
                                       Method::Lwf, {2}, dir / "c_lwf");

    const std::string configs = " --config " + cv_i.string() + " --config " + cv_l.string() +
                                " --config " + cc_i.string() + " --config " + cc_l.string();
    const CmdResult first = run_cli("compare" + configs + " --out " + (dir / "cmp").string());
    CHECK(first.code == 0);
    CHECK(first.out.find("running") != std::string::npos);  // no reports existed yet
    CHECK(fs::exists(dir / "cmp" / "compare.csv"));
    CHECK(fs::exists(dir / "cmp" / "compare.svg"));
    CHECK(xml_well_formed(dir / "cmp" / "compare.svg"));

    const std::string csv = read_file(dir / "cmp" / "compare.csv");
    CHECK(csv.find("kind,ilgaco,lwf") == 0);
    CHECK(csv.find("\nviewpoints,") != std::string::npos);
    CHECK(csv.find("\nconditions,") != std::string::npos);

    // Second invocation reuses the finished runs.
    const CmdResult second = run_cli("compare" + configs + " --out " + (dir / "cmp2").string());
    CHECK(second.code == 0);
    CHECK(second.out.find("running") == std::string::npos);
    CHECK(read_file(dir / "cmp2" / "compare.csv") == csv);

    // Fewer than two configs is a usage error.
    CHECK(run_cli("compare --config " + cv_i.string() + " --out " + (dir / "cmp3").string())
              .code == 2);
}

TEST_CASE("compare refuses configs that use different datasets") {
    const auto dir = tmp_dir("compare_mismatch");
    const fs::path a = write_config(dir, "a.json", ExperimentKind::Viewpoints, Method::Ilgaco,
                                    {0, 1}, dir / "a_out");

    ExperimentConfig other;
    DatasetSpec spec = test_util::tiny_spec();
    spec.seed += 1;  // different data, same shape
    other.dataset_spec = spec;
    other.kind = ExperimentKind::Viewpoints;
    other.method = Method::Lwf;
    other.factor_order = {0, 1};
    other.train = tiny_train_config();
    other.out_dir = (dir / "b_out").string();
    write_file(dir / "b.json", experiment_config_to_json(other));

    const CmdResult r = run_cli("compare --config " + a.string() + " --config " +
                                (dir / "b.json").string() + " --out " + (dir / "cmp").string());
    CHECK(r.code == 2);
    CHECK(r.err.find("different datasets") != std::string::npos);
}

TEST_CASE("plot renders a report with and without the upper-bound line") {
    const auto dir = tmp_dir("plot");
    const fs::path inc_cfg = write_config(dir, "inc.json", ExperimentKind::Viewpoints,
                                          Method::Ilgaco, {0, 1}, dir / "inc");
    const fs::path joint_cfg = write_config(dir, "joint.json", ExperimentKind::Viewpoints,
                                            Method::Joint, {0, 1}, dir / "joint");
    REQUIRE(run_cli("run --config " + inc_cfg.string()).code == 0);
    REQUIRE(run_cli("run --config " + joint_cfg.string()).code == 0);

    const CmdResult bare = run_cli("plot --report " + (dir / "inc" / "report.json").string() +
                                   " --out " + (dir / "bare.svg").string());
    CHECK(bare.code == 0);
    CHECK(xml_well_formed(dir / "bare.svg"));
    CHECK(read_file(dir / "bare.svg").find("stroke-dasharray") == std::string::npos);

    const CmdResult with_ub = run_cli(
        "plot --report " + (dir / "inc" / "report.json").string() + " --upper-bound " +
        (dir / "joint" / "report.json").string() + " --out " + (dir / "ub.svg").string());
    CHECK(with_ub.code == 0);
    CHECK(xml_well_formed(dir / "ub.svg"));
    CHECK(read_file(dir / "ub.svg").find("stroke-dasharray") != std::string::npos);

    CHECK(run_cli("plot --report " + (dir / "absent.json").string() + " --out " +
                  (dir / "x.svg").string())
              .code == 2);
    write_file(dir / "junk.json", "{]");
    CHECK(run_cli("plot --report " + (dir / "junk.json").string() + " --out " +
                  (dir / "x.svg").string())
              .code == 2);
}

}  // TEST_SUITE
