#include "advpad/eval/report.hpp"

#include <cstdio>
#include <fstream>

#include "advpad/error.hpp"
#include "json.hpp"

namespace advpad::eval {

using nlohmann::json;

std::string report_json(const EvalReport& report) {
  json j;
  j["kind"] = report.kind;
  j["budget"] = report.budget;
  j["samples"] = report.samples;
  j["clean_accuracy"] = report.clean_accuracy;
  j["rows"] = json::array();
  for (const auto& r : report.rows) {
    j["rows"].push_back({{"name", r.name},
                         {"acc", r.acc},
                         {"label_accuracy", r.label_accuracy},
                         {"count", r.count},
                         {"pad_length", r.pad_length},
                         {"mean_added_bytes", r.mean_added_bytes},
                         {"bandwidth_overhead_pct", r.bandwidth_overhead},
                         {"seconds", r.seconds}});
  }
  try {
    j["config"] = json::parse(report.config_json);
  } catch (const json::exception&) {
    j["config"] = report.config_json;
  }
  return j.dump(2);
}

std::string report_text(const EvalReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%s-level evaluation: %zu samples, budget %zu, clean accuracy %.4f\n",
                report.kind.c_str(), report.samples, report.budget, report.clean_accuracy);
  out += line;
  std::snprintf(line, sizeof line, "%-16s %8s %10s %9s %11s %9s\n", "defense", "ACC", "label_acc", "pad",
                "overhead_%", "seconds");
  out += line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-16s %8.4f %10.4f %9zu %11.3f %9.2f\n", r.name.c_str(), r.acc,
                  r.label_accuracy, r.pad_length, r.bandwidth_overhead, r.seconds);
    out += line;
  }
  return out;
}

std::string sweep_csv(const std::string& x_name, std::span<const SweepPoint> points) {
  std::string out = x_name + ",acc,label_accuracy,mean_entropy\n";
  char line[160];
  for (const auto& p : points) {
    std::snprintf(line, sizeof line, "%g,%.6f,%.6f,%.6f\n", p.x, p.acc, p.label_accuracy, p.mean_entropy);
    out += line;
  }
  return out;
}

std::string sweep_json(const std::string& x_name, std::span<const SweepPoint> points) {
  json j = json::array();
  for (const auto& p : points) {
    j.push_back({{x_name, p.x}, {"acc", p.acc}, {"label_accuracy", p.label_accuracy}, {"mean_entropy", p.mean_entropy}});
  }
  return j.dump(2);
}

std::string truncation_csv(std::span<const classifier::TruncationPoint> points) {
  std::string out = "length,accuracy\n";
  char line[64];
  for (const auto& p : points) {
    std::snprintf(line, sizeof line, "%zu,%.6f\n", p.length, p.accuracy);
    out += line;
  }
  return out;
}

std::string latency_json(const LatencyStats& stats, const std::string& scheme) {
  return json{{"scheme", scheme},
              {"count", stats.count},
              {"mean_ms", stats.mean_ms},
              {"variance_ms2", stats.variance_ms2},
              {"total_seconds", stats.total_seconds}}
      .dump(2);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace advpad::eval
