#pragma once

// Flat "key = value" configuration with '#' comment lines. Unknown keys are
// rejected so typos fail loudly. String keys name input/output paths; the
// remaining keys carry the numeric pipeline parameters with the documented
// defaults.

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "hypotax/cluster.hpp"
#include "hypotax/crf.hpp"
#include "hypotax/error.hpp"
#include "hypotax/util.hpp"
#include "hypotax/wordspace.hpp"

namespace hypotax {

struct PipelineConfig {
  std::filesystem::path train_corpus;
  std::filesystem::path raw_corpus;
  std::filesystem::path gold;
  std::filesystem::path model_low;
  std::filesystem::path model_high;
  std::filesystem::path workdir;

  WindowConfig window;    // window = 8,8 / dimension = 12
  ClusterConfig cluster;  // threshold = 0.5 / linkage = average
  TrainConfig train;      // l2_sigma = 10 / max_iterations = 200 /
                          // gradient_tolerance = 1e-4 / seed = 1

  // Sweep grid as (left, right, dimension) triples; empty disables sweeping.
  std::vector<WindowConfig> sweep;
};

namespace detail {

inline WindowConfig parse_sweep_triple(std::string_view item, std::size_t line_no,
                                       const std::string& file) {
  auto parts = split(item, ',');
  if (parts.size() != 3)
    throw ParseError(file, line_no,
                     "sweep entry must be left,right,dimension: '" +
                         std::string(item) + "'");
  WindowConfig w;
  auto num = [&](std::string_view s, const char* what) {
    auto v = parse_int(trim(s), what);
    if (v < 0) throw ParseError(file, line_no, std::string(what) + " must be >= 0");
    return static_cast<std::size_t>(v);
  };
  w.left = num(parts[0], "window left");
  w.right = num(parts[1], "window right");
  w.dimension = num(parts[2], "dimension");
  w.validate();
  return w;
}

}  // namespace detail

inline PipelineConfig parse_config(std::istream& in,
                                   const std::string& file = "<stream>") {
  PipelineConfig cfg;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv = trim(line);
    if (sv.empty() || sv[0] == '#') continue;
    auto eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(file, line_no, "expected 'key = value'");
    std::string key(trim(sv.substr(0, eq)));
    std::string value(trim(sv.substr(eq + 1)));
    if (key.empty()) throw ParseError(file, line_no, "empty key");
    if (!seen.insert(key).second)
      throw ParseError(file, line_no, "duplicate key '" + key + "'");

    try {
      if (key == "train_corpus") cfg.train_corpus = value;
      else if (key == "raw_corpus") cfg.raw_corpus = value;
      else if (key == "gold") cfg.gold = value;
      else if (key == "model_low") cfg.model_low = value;
      else if (key == "model_high") cfg.model_high = value;
      else if (key == "workdir") cfg.workdir = value;
      else if (key == "window") {
        auto parts = split(value, ',');
        if (parts.size() != 2)
          throw ConfigError("window must be 'left,right'");
        auto l = parse_int(trim(parts[0]), "window left");
        auto r = parse_int(trim(parts[1]), "window right");
        if (l < 0 || r < 0) throw ConfigError("window sizes must be >= 0");
        cfg.window.left = static_cast<std::size_t>(l);
        cfg.window.right = static_cast<std::size_t>(r);
        cfg.window.validate();
      } else if (key == "dimension") {
        auto d = parse_int(value, "dimension");
        if (d < 1) throw ConfigError("dimension must be >= 1");
        cfg.window.dimension = static_cast<std::size_t>(d);
      } else if (key == "threshold") {
        cfg.cluster.threshold = parse_double(value, "threshold");
        cfg.cluster.validate();
      } else if (key == "linkage") {
        if (!linkage_from_name(value, cfg.cluster.linkage))
          throw ConfigError("unknown linkage '" + value + "'");
      } else if (key == "l2_sigma") {
        cfg.train.l2_sigma = parse_double(value, "l2_sigma");
      } else if (key == "max_iterations") {
        cfg.train.max_iterations = static_cast<int>(parse_int(value, "max_iterations"));
      } else if (key == "gradient_tolerance") {
        cfg.train.gradient_tolerance = parse_double(value, "gradient_tolerance");
      } else if (key == "seed") {
        cfg.train.seed = static_cast<std::uint64_t>(parse_int(value, "seed"));
      } else if (key == "sweep") {
        for (auto item : split(value, ';')) {
          auto t = trim(item);
          if (t.empty()) continue;
          cfg.sweep.push_back(detail::parse_sweep_triple(t, line_no, file));
        }
      } else {
        throw ParseError(file, line_no, "unknown key '" + key + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(file, line_no, e.what());
    }
  }
  cfg.train.validate();
  return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_config(in, path.string());
}

}  // namespace hypotax
