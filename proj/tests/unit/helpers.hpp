#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "instructkit/io.hpp"
#include "instructkit/types.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("instructkit-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
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

  std::filesystem::path write(const std::string& name, const std::string& contents) const {
    instructkit::io::write_file(path_ / name, contents);
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline instructkit::DatasetMeta classification_meta(std::string id = "ds",
                                                    std::vector<std::string> labels = {"positive", "negative"}) {
  instructkit::DatasetMeta meta;
  meta.id = std::move(id);
  meta.name = "Dataset " + meta.id;
  meta.language = instructkit::Language::parse("english");
  meta.task = "Sentiment";
  meta.task_definition = "Classify the sentiment of the text.";
  meta.label_space = std::move(labels);
  meta.task_kind = instructkit::TaskKind::single_label;
  meta.metric = instructkit::MetricKind::parse("accuracy");
  return meta;
}

/// Records with the given labels, ordinals 0..n-1 and distinct texts.
inline std::vector<instructkit::Record> labeled_records(const std::string& dataset_id,
                                                        const std::vector<std::string>& labels) {
  std::vector<instructkit::Record> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    instructkit::Record r;
    r.ordinal = i;
    r.record_id = instructkit::make_record_id(dataset_id, i);
    r.text = "text number " + std::to_string(i);
    r.labels = {labels[i]};
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace testing
