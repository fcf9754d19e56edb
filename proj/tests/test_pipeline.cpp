#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "fixtures.hpp"
#include "zzhd/errors.hpp"
#include "zzhd/features.hpp"
#include "zzhd/pipeline.hpp"

using namespace zzhd;
namespace fs = std::filesystem;

namespace {

ScenarioConfig scenario(int benign, int malicious) {
  ScenarioConfig s;
  s.duration = 8 * 3600;
  s.benign_ips = fixture::numbered_ips("10.0.1.", benign);
  s.malicious_ips = fixture::numbered_ips("10.0.9.", malicious);
  if (malicious > 0) s.attack_windows = {{3 * 3600, 5 * 3600}};
  return s;
}

PipelineConfig quick(PipelineConfig cfg) {
  cfg.train.epochs = 40;
  cfg.workers = 2;
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ZZHD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct EnvGuard {
  explicit EnvGuard(const char* value) {
    if (value) ::setenv("ZZHD_WORKERS", value, 1);
    else ::unsetenv("ZZHD_WORKERS");
  }
  ~EnvGuard() { ::unsetenv("ZZHD_WORKERS"); }
};

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("config parsing") {
    const auto cfg = parse_pipeline_config(R"({
      "inputs": ["a.csv", "b.jsonl"], "format": "jsonl",
      "window": {"window_len": 1200, "stride": 600, "subwindow_len": 7200},
      "sub_stride": 1800, "clip_mode": "recompute",
      "train": {"seed": 3, "learning_rate": 0.01, "epochs": 10, "batch_size": 8, "optimizer": "sgd", "activation": "identity"},
      "train_ips": ["x"], "test_ips": ["y"], "labels": "l.csv", "output_dir": "o", "workers": 2})");
    CHECK(cfg.inputs.size() == 2);
    CHECK(cfg.format == InputFormat::jsonl);
    CHECK(cfg.window.windows_per_subwindow() == 12);
    CHECK(cfg.clip_mode == ClipMode::recompute);
    CHECK(cfg.train.optimizer == Optimizer::sgd);
    CHECK(cfg.train.batch_size == 8);
    CHECK(cfg.labels == fs::path("l.csv"));
    CHECK_NOTHROW(cfg.validate());

    CHECK_THROWS_AS(parse_pipeline_config(R"({"input": []})"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_config(R"({"window": {"len": 3}})"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_config(R"({"train": {"epochs": "many"}})"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_config(R"({"clip_mode": "trim"})"), ConfigError);

    PipelineConfig overlap;
    overlap.train_ips = {"a", "b"};
    overlap.test_ips = {"b"};
    CHECK_THROWS_AS(overlap.validate(), ConfigError);
    overlap.allow_ip_overlap = true;
    CHECK_NOTHROW(overlap.validate());
    PipelineConfig stride;
    stride.sub_stride = 450;
    CHECK_THROWS_AS(stride.validate(), ConfigError);
    PipelineConfig dims;
    dims.max_dim = 1;
    CHECK_THROWS_AS(dims.validate(), ConfigError);
  }

  TEST_CASE("worker count resolution") {
    {
      EnvGuard env(nullptr);
      CHECK(resolve_workers(5) == 5);
      CHECK(resolve_workers(0) >= 1);
    }
    {
      EnvGuard env("3");
      CHECK(resolve_workers(5) == 3);
    }
    {
      EnvGuard env("zero");
      CHECK_THROWS_AS(resolve_workers(1), ConfigError);
    }
  }

  TEST_CASE("parallel_for visits every index and rethrows the first failure") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    std::vector<int> seen(50, 0);
    try {
      parallel_for(seen.size(), 4, [&](std::size_t i) {
        seen[i] = 1;
        if (i == 7 || i == 30) throw DataError("task " + std::to_string(i));
      });
      FAIL("expected an exception");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()) == "task 7");
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
    parallel_for(0, 4, [](std::size_t) { FAIL("no tasks expected"); });
  }

  TEST_CASE("IP file stems") {
    CHECK(ip_file_stem("10.0.0.1") == "10.0.0.1");
    CHECK(ip_file_stem("fe80::1") == "fe80__1");
  }

  TEST_CASE("benign-only corpus has no loop features") {
    fixture::TempDir dir("benign");
    const auto cfg = quick(fixture::write_corpus(dir, scenario(6, 0)));
    std::ostringstream log;
    const auto summary = cmd_featurize(cfg, log);
    CHECK(summary.ips == 6);
    CHECK(summary.rejected == 0);
    const auto rows = parse_feature_csv(read_text_file(cfg.output_dir / layout::kAccFeatures));
    CHECK(rows.size() == summary.rows);
    CHECK(rows.size() == 6 * subwindow_starts(summary.snapshots, 12, 12).size());
    for (const FeatureRow& r : rows) {
      REQUIRE(r.values.size() == 8);
      for (std::size_t k = 4; k < 8; ++k) CHECK(r.values[k] == 0);
      for (double v : r.values) CHECK(v >= 0);
    }
    const auto stats = parse_feature_csv(read_text_file(cfg.output_dir / layout::kStatsFeatures));
    CHECK(stats.size() == rows.size());
    CHECK(stats.front().values.size() == 48);
    CHECK(fs::exists(cfg.output_dir / layout::kBarcodeIndex));
    CHECK(fs::exists(cfg.output_dir / layout::kBarcodeDir / "10.0.1.1.csv"));
  }

  TEST_CASE("input with no usable records yields empty feature files") {
    fixture::TempDir dir("empty");
    write_text_file(dir / "flows.csv", "timestamp,src_ip,dst_port,image_path\n2019-10-01T00:00:00Z,127.0.0.1,80,a\n");
    PipelineConfig cfg;
    cfg.inputs = {dir / "flows.csv"};
    cfg.output_dir = dir / "out";
    std::ostringstream log;
    const auto s = cmd_featurize(cfg, log);
    CHECK(s.records == 0);
    CHECK(s.rejected == 1);
    CHECK(log.str().find("warning") != std::string::npos);
    CHECK(parse_feature_csv(read_text_file(cfg.output_dir / layout::kAccFeatures)).empty());
    CHECK(read_text_file(cfg.output_dir / layout::kRejects).find("localhost_src,1") != std::string::npos);
    CHECK_THROWS_AS(cmd_train(cfg, log), DataError);
  }

  TEST_CASE("separate stages reproduce a full run byte for byte") {
    fixture::TempDir dir("stages");
    auto cfg = quick(fixture::write_corpus(dir, scenario(5, 2)));
    cfg.test_ips = {"10.0.1.5", "10.0.9.1", "10.0.9.2"};
    std::ostringstream log;
    cmd_run(cfg, log);
    const fs::path first = dir / "first";
    fs::rename(cfg.output_dir, first);
    cfg.workers = 1;
    cmd_featurize(cfg, log);
    cmd_train(cfg, log);
    cmd_score(cfg, log);
    cmd_report(cfg, log);
    for (const char* f : {layout::kAccFeatures, layout::kStatsFeatures, layout::kAccModel, layout::kStatsModel,
                          layout::kLosses, layout::kPercentiles, layout::kBarcodeIndex}) {
      INFO(f);
      CHECK(read_text_file(first / f) == read_text_file(cfg.output_dir / f));
    }
    const auto losses = parse_losses_csv(read_text_file(cfg.output_dir / layout::kLosses));
    for (const LossRow& r : losses) {
      CHECK(std::find(cfg.test_ips.begin(), cfg.test_ips.end(), r.src_ip) != cfg.test_ips.end());
      CHECK(std::isfinite(r.mse_acc));
      CHECK(std::isfinite(r.mse_stats));
    }
    CHECK(fs::exists(cfg.output_dir / "report" / "loss_10.0.9.1.svg"));
    CHECK(fs::exists(cfg.output_dir / "report" / "barcode_10.0.9.1.svg"));
  }

  TEST_CASE("training rows score near the training loss") {
    fixture::TempDir dir("trainscore");
    auto cfg = quick(fixture::write_corpus(dir, scenario(6, 0)));
    cfg.train.epochs = 100;
    std::ostringstream log;
    cmd_featurize(cfg, log);
    const TrainSummary t = cmd_train(cfg, log);
    CHECK(t.acc_final <= t.acc_initial);
    CHECK(t.stats_final <= t.stats_initial);
    cmd_score(cfg, log);
    const auto rows = parse_losses_csv(read_text_file(cfg.output_dir / layout::kLosses));
    REQUIRE(rows.size() == t.rows);
    std::vector<double> acc, stats;
    for (const LossRow& r : rows) {
      acc.push_back(r.mse_acc);
      stats.push_back(r.mse_stats);
    }
    // The scored rows are the training rows, whose mean loss is the final training
    // loss; by Markov's inequality the median is at most twice the mean.
    CHECK(*percentile(acc, 50) <= 2 * t.acc_final * (1 + 1e-9));
    CHECK(*percentile(stats, 50) <= 2 * t.stats_final * (1 + 1e-9));
  }

  TEST_CASE("per-host training writes one model pair per host") {
    fixture::TempDir dir("perhost");
    auto cfg = quick(fixture::write_corpus(dir, scenario(4, 1)));
    cfg.hosts = {{"h1", {"10.0.1.1", "10.0.1.2"}}, {"h2", {"10.0.1.3", "10.0.9.1"}}, {"idle", {"10.9.9.9"}}};
    cfg.per_host = true;
    cfg.test_ips = {"10.0.1.2", "10.0.9.1", "10.0.1.4"};
    std::ostringstream log;
    cmd_featurize(cfg, log);
    const TrainSummary t = cmd_train(cfg, log);
    CHECK(t.models == 2);
    CHECK(log.str().find("host idle has no training rows") != std::string::npos);
    CHECK(fs::exists(cfg.output_dir / layout::kHostModelDir / "h1" / "acc.model"));
    CHECK(fs::exists(cfg.output_dir / layout::kHostModelDir / "h2" / "stats.model"));
    CHECK_FALSE(fs::exists(cfg.output_dir / layout::kAccModel));
    cmd_score(cfg, log);
    CHECK(log.str().find("no per-host model for 10.0.1.4") != std::string::npos);
    const auto rows = parse_losses_csv(read_text_file(cfg.output_dir / layout::kLosses));
    std::set<std::string> scored;
    for (const LossRow& r : rows) scored.insert(r.src_ip);
    CHECK(scored == std::set<std::string>{"10.0.1.2", "10.0.9.1"});

    // Host h1 trains only on 10.0.1.1, so its model must equal a pooled model trained on that IP alone.
    auto solo = cfg;
    solo.per_host = false;
    solo.output_dir = dir / "solo";
    solo.train_ips = {"10.0.1.1"};
    solo.test_ips = {};
    cmd_featurize(solo, log);
    cmd_train(solo, log);
    CHECK(read_text_file(solo.output_dir / layout::kAccModel) ==
          read_text_file(cfg.output_dir / layout::kHostModelDir / "h1" / "acc.model"));

    PipelineConfig bad;
    bad.per_host = true;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.hosts = {{"a", {"x"}}, {"b", {"x"}}};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    const auto parsed = parse_pipeline_config(R"({"hosts": {"h": ["1.2.3.4"]}, "per_host": true})");
    CHECK(parsed.hosts.at("h") == std::vector<std::string>{"1.2.3.4"});
    CHECK(parsed.per_host);
    CHECK_THROWS_AS(parse_pipeline_config(R"({"hosts": ["h"]})"), ConfigError);
  }

  TEST_CASE("feature width must match the trained model") {
    fixture::TempDir dir("width");
    auto cfg = quick(fixture::write_corpus(dir, scenario(3, 0)));
    std::ostringstream log;
    cmd_featurize(cfg, log);
    cmd_train(cfg, log);
    auto rows = parse_feature_csv(read_text_file(cfg.output_dir / layout::kAccFeatures));
    for (auto& r : rows) r.values.push_back(0);
    write_text_file(cfg.output_dir / layout::kAccFeatures, format_feature_csv(rows, 'f', 9));
    CHECK_THROWS_AS(cmd_score(cfg, log), DataError);
  }

  TEST_CASE("recompute mode produces the same rows") {
    fixture::TempDir dir("recompute");
    auto cfg = quick(fixture::write_corpus(dir, scenario(2, 1)));
    std::ostringstream log;
    cmd_featurize(cfg, log);
    const auto clip = parse_feature_csv(read_text_file(cfg.output_dir / layout::kAccFeatures));
    cfg.clip_mode = ClipMode::recompute;
    cmd_featurize(cfg, log);
    const auto recomputed = parse_feature_csv(read_text_file(cfg.output_dir / layout::kAccFeatures));
    REQUIRE(clip.size() == recomputed.size());
    for (std::size_t i = 0; i < clip.size(); ++i) {
      CHECK(clip[i].src_ip == recomputed[i].src_ip);
      CHECK(clip[i].sub_start == recomputed[i].sub_start);
      for (double v : recomputed[i].values) CHECK(v >= 0);
    }
  }

  TEST_CASE("command-line exit codes") {
    fixture::TempDir dir("cli");
    CHECK(run_cli("selftest") == 0);
    CHECK(run_cli("") == 1);
    CHECK(run_cli("featurize --input " + (dir / "missing.csv").string() + " -o " + (dir / "o").string()) == 1);
    write_text_file(dir / "bad.json", R"({"epochs": 3})");
    CHECK(run_cli("run --config " + (dir / "bad.json").string()) == 1);
    write_text_file(dir / "scenario.json", R"({"duration": 10800, "benign_ips": ["10.0.0.1", "10.0.0.2"]})");
    const std::string flows = (dir / "flows.jsonl").string();
    CHECK(run_cli("synth -s " + (dir / "scenario.json").string() + " -o " + flows + " --labels-out " +
                  (dir / "labels.csv").string()) == 0);
    CHECK(run_cli("run -i " + flows + " -o " + (dir / "out").string() + " --epochs 5 --labels " +
                  (dir / "labels.csv").string()) == 0);
    CHECK(fs::exists(dir / "out" / layout::kPercentiles));
  }
}
