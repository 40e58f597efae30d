#pragma once

// CSV and summary writers. Numbers print with "%.12g" so that artifacts are
// byte-identical whenever the computed values are.

#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace diffcover {

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header)
      : f_(std::fopen(path.c_str(), "w")) {
    if (!f_) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(f_, "%s\n", header.c_str());
  }
  ~CsvWriter() {
    if (f_) std::fclose(f_);
  }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
      std::fprintf(f_, i ? ",%.12g" : "%.12g", values[i]);
    std::fprintf(f_, "\n");
  }
  void row(const std::string& label, const std::vector<double>& values) {
    std::fprintf(f_, "%s", label.c_str());
    for (double v : values) std::fprintf(f_, ",%.12g", v);
    std::fprintf(f_, "\n");
  }

 private:
  std::FILE* f_;
};

// Stable-format `key: value` lines, written in insertion order.
class SummaryWriter {
 public:
  void add(const std::string& key, const std::string& value) {
    lines_.emplace_back(key, value);
  }
  void add(const std::string& key, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    add(key, std::string(buf));
  }
  void add(const std::string& key, std::size_t value) {
    add(key, std::to_string(value));
  }
  void write(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& [k, v] : lines_) std::fprintf(f, "%s: %s\n", k.c_str(), v.c_str());
    std::fclose(f);
  }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

}  // namespace diffcover
