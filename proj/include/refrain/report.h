/* Copyright 2026 The REFRAIN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "refrain/harness.h"

namespace refrain {

enum class ReportFormat { kJson, kCsv, kCurve };

std::string_view to_string(ReportFormat format);
ReportFormat parse_report_format(std::string_view name);

nlohmann::json episode_to_json(const EpisodeResult& episode);
EpisodeResult episode_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const BenchmarkReport& report);
// Throws DatasetError on schema mismatch.
BenchmarkReport report_from_json(const nlohmann::json& j);
BenchmarkReport load_report(const std::string& path);

// One row per episode followed by an aggregate row.
std::string report_to_csv(const BenchmarkReport& report);

// Accuracy-versus-tokens point for the cost curve.
struct CurvePoint {
  std::string label;
  std::int64_t total_tokens = 0;
  double pass_at_1 = 0.0;
};

CurvePoint curve_point(const BenchmarkReport& report, std::string label);
// Whitespace-separated lines under a "#" header.
std::string curve_points_text(const std::vector<CurvePoint>& points);

std::string render_report(const BenchmarkReport& report, ReportFormat format,
                          const std::string& label = "run");
// Throws IoError when the file cannot be written.
void write_text_file(const std::string& path, const std::string& text);

// Human-readable differences; empty when the reports match. Floating fields
// compare within `tolerance`.
std::vector<std::string> diff_reports(const BenchmarkReport& a, const BenchmarkReport& b,
                                      double tolerance = 0.0);

}  // namespace refrain
