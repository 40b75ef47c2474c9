#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "advpad/classifier/toy_classifier.hpp"
#include "advpad/eval/experiments.hpp"
#include "advpad/eval/metrics.hpp"

namespace advpad::eval {

std::string report_json(const EvalReport& report);
// Fixed-width table, one row per defense.
std::string report_text(const EvalReport& report);

// CSV with header "<x_name>,acc,label_accuracy,mean_entropy".
std::string sweep_csv(const std::string& x_name, std::span<const SweepPoint> points);
std::string sweep_json(const std::string& x_name, std::span<const SweepPoint> points);
std::string truncation_csv(std::span<const classifier::TruncationPoint> points);
std::string latency_json(const LatencyStats& stats, const std::string& scheme);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace advpad::eval
