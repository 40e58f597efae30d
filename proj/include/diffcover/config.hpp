#pragma once

// Key-value experiment configs: a structured text file (`key = value`, '#'
// comments) plus programmatic overrides (CLI flags win). Unknown keys are
// rejected with their line number.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace diffcover {

inline const std::set<std::string>& allowed_config_keys() {
  static const std::set<std::string> keys{
      "experiment",  "preset",     "alpha",       "kappa",       "dim",
      "x0",          "region",     "t_grid",      "delta",       "c",
      "c1",          "c2",         "delta0",      "n_terms",     "renormalize",
      "eps_list",    "start_index", "t",          "model",       "radii",
      "r",           "warp",       "q",           "r0",          "r_grid",
      "quad_step",   "cover_mode", "region_radius", "bound_k",   "cert",
      "save_cert",   "grid",       "horizon",     "n_paths",     "dt",
      "seed",        "explosion_radius", "workers", "out_dir",   "n_samples",
      "convention",  "k_radius",   "max_links",   "a",           "b"};
  return keys;
}

class ExperimentConfig {
 public:
  ExperimentConfig() = default;

  static ExperimentConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    return from_stream(in, path);
  }

  static ExperimentConfig from_stream(std::istream& in,
                                      const std::string& name = "<config>") {
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string s = line;
      auto hash = s.find('#');
      if (hash != std::string::npos) s.erase(hash);
      auto notspace = [](unsigned char c) { return !std::isspace(c); };
      s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
      s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
      if (s.empty()) continue;
      auto eq = s.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument(name + ":" + std::to_string(line_no) +
                                    ": expected 'key = value'");
      std::string key = trim(s.substr(0, eq));
      std::string value = trim(s.substr(eq + 1));
      if (!allowed_config_keys().count(key))
        throw std::invalid_argument(name + ":" + std::to_string(line_no) +
                                    ": unknown key '" + key + "'");
      if (value.empty())
        throw std::invalid_argument(name + ":" + std::to_string(line_no) +
                                    ": empty value for '" + key + "'");
      cfg.kv_[key] = value;
    }
    return cfg;
  }

  // Overrides (CLI flags) win over file values.
  void set(const std::string& key, const std::string& value) {
    if (!allowed_config_keys().count(key))
      throw std::invalid_argument("config: unknown key '" + key + "'");
    kv_[key] = value;
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_str(const std::string& key,
                      const std::string& fallback = "") const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  double get_num(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    return parse_num(key, it->second);
  }

  double get_pos(const std::string& key, double fallback) const {
    double v = get_num(key, fallback);
    if (!(v > 0.0))
      throw std::invalid_argument("config: '" + key + "' must be positive");
    return v;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
      return std::stoull(it->second);
    } catch (const std::exception&) {
      throw std::invalid_argument("config: bad integer for '" + key + "'");
    }
  }

  std::vector<double> get_list(const std::string& key,
                               std::vector<double> fallback = {}) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_num(key, tok));
    if (out.empty())
      throw std::invalid_argument("config: empty list for '" + key + "'");
    return out;
  }

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  static std::string trim(std::string s) {
    auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
  }
  static double parse_num(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      double x = std::stod(v, &used);
      while (used < v.size() && std::isspace(static_cast<unsigned char>(v[used])))
        ++used;
      if (used != v.size()) throw std::invalid_argument("trailing");
      return x;
    } catch (const std::exception&) {
      throw std::invalid_argument("config: bad number for '" + key + "': '" +
                                  v + "'");
    }
  }

  std::map<std::string, std::string> kv_;
};

}  // namespace diffcover
