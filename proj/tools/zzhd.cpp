// zzhd command-line front end.

#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "zzhd/complex.hpp"
#include "zzhd/errors.hpp"
#include "zzhd/features.hpp"
#include "zzhd/io.hpp"
#include "zzhd/pipeline.hpp"
#include "zzhd/synth.hpp"
#include "zzhd/zigzag.hpp"

namespace {

using namespace zzhd;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!trim(item).empty()) out.emplace_back(trim(item));
  }
  return out;
}

// Flags shared by the pipeline subcommands; unset ones leave the config alone.
struct Overrides {
  std::string config;
  std::vector<std::string> inputs;
  std::string format;
  std::string output_dir;
  std::string clip_mode;
  std::string labels;
  std::string train_ips;
  std::string test_ips;
  std::int64_t sub_stride = 0;
  std::int64_t seed = -1;
  int epochs = 0;
  std::size_t workers = 0;
  bool per_host = false;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "JSON pipeline config");
    app->add_option("-i,--input", inputs, "Flow log file (repeatable)");
    app->add_option("--format", format, "csv or jsonl");
    app->add_option("-o,--output-dir", output_dir, "Output directory");
    app->add_option("--clip-mode", clip_mode, "clip or recompute");
    app->add_option("--labels", labels, "Ground-truth label csv");
    app->add_option("--train-ips", train_ips, "Comma-separated training IPs");
    app->add_option("--test-ips", test_ips, "Comma-separated test IPs");
    app->add_option("--sub-stride", sub_stride, "Sub-window step in seconds");
    app->add_option("--seed", seed, "Training seed");
    app->add_option("--epochs", epochs, "Training epochs");
    app->add_option("--workers", workers, "Worker threads");
    app->add_flag("--per-host", per_host, "One model pair per host from the config's hosts map");
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg = config.empty() ? PipelineConfig{} : parse_pipeline_config(read_text_file(config));
    if (!inputs.empty()) cfg.inputs.assign(inputs.begin(), inputs.end());
    if (!format.empty()) cfg.format = parse_input_format(format);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (!clip_mode.empty()) cfg.clip_mode = parse_clip_mode(clip_mode);
    if (!labels.empty()) cfg.labels = labels;
    if (!train_ips.empty()) cfg.train_ips = split_list(train_ips);
    if (!test_ips.empty()) cfg.test_ips = split_list(test_ips);
    if (sub_stride > 0) cfg.sub_stride = sub_stride;
    if (seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(seed);
    if (epochs > 0) cfg.train.epochs = epochs;
    if (workers > 0) cfg.workers = workers;
    if (per_host) cfg.per_host = true;
    cfg.validate();
    return cfg;
  }
};

SimplicialComplex complex_of(std::initializer_list<std::vector<VertexId>> faces) {
  return SimplicialComplex::from_maximal(faces, 2);
}

bool check(const char* name, bool ok) {
  std::printf("%s %s\n", ok ? "PASS" : "FAIL", name);
  return ok;
}

std::string bars(const std::vector<Barcode>& b, int dim) {
  std::string out;
  for (const Interval& i : b[static_cast<std::size_t>(dim)].intervals) {
    out += "[" + format_half_index(i.birth) + "," + format_half_index(i.death) + "]";
  }
  return out;
}

int selftest() {
  enum : VertexId { a, b, c, d, e };
  bool ok = true;
  const std::vector<SimplicialComplex> filtration = {
      complex_of({{a, b}, {a, c}}), complex_of({{a, b}, {a, c}, {b, c}}), complex_of({{a, b, c}})};
  const auto f = zigzag_barcode(filtration, 1);
  ok &= check("filled-triangle filtration D0 = [0,inf]", bars(f, 0) == "[0,inf]");
  ok &= check("filled-triangle filtration D1 = [1,2]", bars(f, 1) == "[1,2]");

  const std::vector<SimplicialComplex> loops = {complex_of({{a, b}, {a, c}, {b, c}}),
                                                complex_of({{a, c}, {a, d}, {c, d}}),
                                                complex_of({{a, b}, {a, e}, {b, e}})};
  const auto z = zigzag_barcode(loops, 1);
  ok &= check("three-loop zigzag D0 = [0,inf]", bars(z, 0) == "[0,inf]");
  ok &= check("three-loop zigzag D1 = [0,1][0.5,2][1.5,inf]", bars(z, 1) == "[0,1][0.5,2][1.5,inf]");

  const std::vector<RealInterval> one = {{1, 2}};
  const std::vector<RealInterval> two = {{0, 2}, {1, 3}};
  ok &= check("ACC of {[1,2]}, d_max 3 = (1,1,1,1)", acc_features(one, 3) == std::array<double, 4>{1, 1, 1, 1});
  ok &= check("ACC of {[0,2],[1,3]}, d_max 3 = (2,2,16,16)",
              acc_features(two, 3) == std::array<double, 4>{2, 2, 16, 16});
  return ok ? 0 : 2;
}

int run_synth(const std::string& scenario_path, const std::string& out_path, const std::string& labels_path,
              std::int64_t seed) {
  ScenarioConfig cfg = scenario_path.empty() ? ScenarioConfig{} : parse_scenario_config(read_text_file(scenario_path));
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  if (cfg.benign_ips.empty() && cfg.malicious_ips.empty()) {
    throw ConfigError("scenario lists no IPs");
  }
  const auto records = generate(cfg);
  const bool jsonl = format_from_extension(out_path) == InputFormat::jsonl;
  write_text_file(out_path, jsonl ? format_flow_jsonl(records) : format_flow_csv(records));
  if (!labels_path.empty()) write_text_file(labels_path, format_labels_csv(scenario_labels(cfg)));
  std::cerr << "wrote " << records.size() << " records to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zigzag-persistence anomaly detection for network flow logs"};
  app.require_subcommand(1);

  Overrides ov;
  auto* featurize = app.add_subcommand("featurize", "Barcodes and feature files from flow logs");
  auto* train = app.add_subcommand("train", "Train the ACC and stats autoencoders");
  auto* score = app.add_subcommand("score", "Reconstruction losses for the test IPs");
  auto* report = app.add_subcommand("report", "Percentile table and SVG plots");
  auto* run = app.add_subcommand("run", "featurize, train, score and report");
  for (CLI::App* sub : {featurize, train, score, report, run}) ov.attach(sub);

  std::string scenario, synth_out, synth_labels;
  std::int64_t synth_seed = -1;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic flow corpus");
  synth->add_option("-s,--scenario", scenario, "JSON scenario config");
  synth->add_option("-o,--out", synth_out, "Output flow file (.csv or .jsonl)")->required();
  synth->add_option("--labels-out", synth_labels, "Ground-truth label csv to write");
  synth->add_option("--seed", synth_seed, "Override the scenario seed");

  auto* self = app.add_subcommand("selftest", "Check the worked barcode and ACC examples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (self->parsed()) return selftest();
    if (synth->parsed()) return run_synth(scenario, synth_out, synth_labels, synth_seed);
    const PipelineConfig cfg = ov.resolve();
    if (featurize->parsed()) {
      const FeaturizeSummary s = cmd_featurize(cfg, std::cerr);
      std::cerr << s.records << " records (" << s.rejected << " rejected), " << s.ips << " IPs, " << s.snapshots
                << " windows, " << s.rows << " sub-windows\n";
    } else if (train->parsed()) {
      cmd_train(cfg, std::cerr);
    } else if (score->parsed()) {
      std::cerr << cmd_score(cfg, std::cerr) << " rows scored\n";
    } else if (report->parsed()) {
      cmd_report(cfg, std::cerr);
    } else if (run->parsed()) {
      cmd_run(cfg, std::cerr);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
