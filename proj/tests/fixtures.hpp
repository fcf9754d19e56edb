#pragma once

// Temporary directories and synthetic corpora shared by the pipeline tests
// and the acceptance runner.

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "zzhd/io.hpp"
#include "zzhd/pipeline.hpp"
#include "zzhd/report.hpp"
#include "zzhd/synth.hpp"

namespace fixture {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("zzhd_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<std::string> numbered_ips(const std::string& prefix, int count) {
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

/// Writes the corpus and its labels into `dir`; returns a pipeline config
/// reading it and writing under dir/out.
inline zzhd::PipelineConfig write_corpus(const TempDir& dir, const zzhd::ScenarioConfig& scenario) {
  zzhd::write_text_file(dir / "flows.csv", zzhd::format_flow_csv(zzhd::generate(scenario)));
  zzhd::write_text_file(dir / "labels.csv", zzhd::format_labels_csv(zzhd::scenario_labels(scenario)));
  zzhd::PipelineConfig cfg;
  cfg.inputs = {dir / "flows.csv"};
  cfg.labels = dir / "labels.csv";
  cfg.output_dir = dir / "out";
  return cfg;
}

}  // namespace fixture
