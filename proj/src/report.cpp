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

#include "refrain/report.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "refrain/errors.h"

namespace refrain {
namespace {

using nlohmann::json;

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

// Shortest round-trip decimal form.
std::string num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string opt_field(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return num(*v);
  } else {
    std::ostringstream os;
    os << *v;
    return os.str();
  }
}

bool close_enough(double a, double b, double tol) {
  return a == b || std::fabs(a - b) <= tol;
}

}  // namespace

std::string_view to_string(ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson:
      return "json";
    case ReportFormat::kCsv:
      return "csv";
    case ReportFormat::kCurve:
      return "curve";
  }
  return "json";
}

ReportFormat parse_report_format(std::string_view name) {
  for (auto f : {ReportFormat::kJson, ReportFormat::kCsv, ReportFormat::kCurve}) {
    if (name == to_string(f)) return f;
  }
  throw ConfigError("unknown report format '" + std::string(name) +
                    "'; valid: json, csv, curve");
}

json episode_to_json(const EpisodeResult& e) {
  return json{
      {"question_id", e.question_id},
      {"policy", std::string(to_string(e.policy))},
      {"tau_used", opt(e.tau_used)},
      {"arm", opt(e.arm)},
      {"stop_step", opt(e.stop_step)},
      {"stopped_early", e.stopped_early},
      {"stop_cause", std::string(to_string(e.stop_cause))},
      {"steps_seen", e.steps_seen},
      {"answer", opt(e.answer)},
      {"correct", e.correct},
      {"unscorable", e.unscorable},
      {"thinking_tokens", e.thinking_tokens},
      {"total_tokens", e.total_tokens},
      {"score", e.score},
      {"reward", e.reward},
      {"cold_start", e.cold_start},
      {"fidelity", std::string(to_string(e.fidelity))},
      {"error", opt(e.error)},
  };
}

EpisodeResult episode_from_json(const json& j) {
  try {
    EpisodeResult e;
    e.question_id = j.at("question_id").get<std::string>();
    e.policy = parse_policy_kind(j.at("policy").get<std::string>());
    e.tau_used = get_opt<double>(j, "tau_used");
    e.arm = get_opt<std::size_t>(j, "arm");
    e.stop_step = get_opt<int>(j, "stop_step");
    e.stopped_early = j.at("stopped_early").get<bool>();
    e.stop_cause = parse_stop_cause(j.at("stop_cause").get<std::string>());
    e.steps_seen = j.at("steps_seen").get<int>();
    e.answer = get_opt<std::string>(j, "answer");
    e.correct = j.at("correct").get<bool>();
    e.unscorable = j.at("unscorable").get<bool>();
    e.thinking_tokens = j.at("thinking_tokens").get<int>();
    e.total_tokens = j.at("total_tokens").get<int>();
    e.score = j.at("score").get<double>();
    e.reward = j.at("reward").get<double>();
    e.cold_start = j.at("cold_start").get<bool>();
    e.fidelity = parse_fidelity(j.at("fidelity").get<std::string>());
    e.error = get_opt<std::string>(j, "error");
    return e;
  } catch (const json::exception& ex) {
    throw DatasetError(std::string("bad episode record: ") + ex.what());
  } catch (const ConfigError& ex) {
    throw DatasetError(std::string("bad episode record: ") + ex.what());
  }
}

json report_to_json(const BenchmarkReport& r) {
  json episodes = json::array();
  for (const auto& e : r.episodes) episodes.push_back(episode_to_json(e));
  json arms = json::array();
  for (const auto& a : r.arm_counts) arms.push_back({{"tau", a.tau}, {"count", a.count}});
  return json{
      {"schema_version", BenchmarkReport::kSchemaVersion},
      {"config", r.config},
      {"pass_at_1", r.pass_at_1},
      {"correct", r.correct_count()},
      {"questions", r.episodes.size()},
      {"total_tokens", r.total_tokens},
      {"arm_counts", arms},
      {"bandit_state", r.bandit_state ? *r.bandit_state : json(nullptr)},
      {"episodes", episodes},
  };
}

BenchmarkReport report_from_json(const json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != BenchmarkReport::kSchemaVersion) {
      throw DatasetError("unsupported report schema_version " + std::to_string(version));
    }
    BenchmarkReport r;
    r.config = j.at("config");
    r.pass_at_1 = j.at("pass_at_1").get<double>();
    r.total_tokens = j.at("total_tokens").get<std::int64_t>();
    for (const auto& a : j.at("arm_counts")) {
      r.arm_counts.push_back({a.at("tau").get<double>(), a.at("count").get<int>()});
    }
    if (j.contains("bandit_state") && !j.at("bandit_state").is_null()) {
      r.bandit_state = j.at("bandit_state");
    }
    for (const auto& e : j.at("episodes")) r.episodes.push_back(episode_from_json(e));
    return r;
  } catch (const json::exception& ex) {
    throw DatasetError(std::string("bad report: ") + ex.what());
  }
}

BenchmarkReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report '" + path + "'");
  try {
    return report_from_json(json::parse(in));
  } catch (const json::parse_error& ex) {
    throw DatasetError("report '" + path + "' is not valid JSON: " + ex.what());
  }
}

std::string report_to_csv(const BenchmarkReport& r) {
  std::ostringstream os;
  os << "question_id,policy,tau_used,arm,stop_step,stopped_early,stop_cause,steps_seen,"
        "answer,correct,unscorable,thinking_tokens,total_tokens,score,reward,"
        "cold_start,fidelity,error\n";
  for (const auto& e : r.episodes) {
    os << csv_field(e.question_id) << ',' << to_string(e.policy) << ','
       << opt_field(e.tau_used) << ',' << opt_field(e.arm) << ','
       << opt_field(e.stop_step) << ',' << (e.stopped_early ? 1 : 0) << ','
       << to_string(e.stop_cause) << ',' << e.steps_seen << ','
       << csv_field(e.answer.value_or("")) << ',' << (e.correct ? 1 : 0) << ','
       << (e.unscorable ? 1 : 0) << ',' << e.thinking_tokens << ',' << e.total_tokens
       << ',' << num(e.score) << ',' << num(e.reward) << ',' << (e.cold_start ? 1 : 0)
       << ',' << to_string(e.fidelity) << ',' << csv_field(e.error.value_or(""))
       << '\n';
  }
  os << "__aggregate__,,,,,,,," << ',' << r.correct_count() << ",,,"
     << r.total_tokens << ',' << num(r.pass_at_1) << ",,,,\n";
  return os.str();
}

CurvePoint curve_point(const BenchmarkReport& report, std::string label) {
  return {std::move(label), report.total_tokens, report.pass_at_1};
}

std::string curve_points_text(const std::vector<CurvePoint>& points) {
  std::ostringstream os;
  os << "# label total_tokens pass_at_1\n";
  for (const auto& p : points) {
    os << p.label << ' ' << p.total_tokens << ' ' << num(p.pass_at_1) << '\n';
  }
  return os.str();
}

std::string render_report(const BenchmarkReport& report, ReportFormat format,
                          const std::string& label) {
  switch (format) {
    case ReportFormat::kCsv:
      return report_to_csv(report);
    case ReportFormat::kCurve:
      return curve_points_text({curve_point(report, label)});
    case ReportFormat::kJson:
      break;
  }
  return report_to_json(report).dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<std::string> diff_reports(const BenchmarkReport& a, const BenchmarkReport& b,
                                      double tolerance) {
  std::vector<std::string> out;
  if (a.config != b.config) out.push_back("config differs");
  if (!close_enough(a.pass_at_1, b.pass_at_1, tolerance)) {
    out.push_back("pass_at_1: " + num(a.pass_at_1) + " vs " + num(b.pass_at_1));
  }
  if (a.total_tokens != b.total_tokens) {
    out.push_back("total_tokens: " + std::to_string(a.total_tokens) + " vs " +
                  std::to_string(b.total_tokens));
  }
  if (a.arm_counts != b.arm_counts) out.push_back("arm_counts differ");
  if (a.bandit_state != b.bandit_state) out.push_back("bandit_state differs");
  if (a.episodes.size() != b.episodes.size()) {
    out.push_back("episode count: " + std::to_string(a.episodes.size()) + " vs " +
                  std::to_string(b.episodes.size()));
    return out;
  }
  for (std::size_t i = 0; i < a.episodes.size(); ++i) {
    json ja = episode_to_json(a.episodes[i]);
    json jb = episode_to_json(b.episodes[i]);
    for (auto it = ja.begin(); it != ja.end(); ++it) {
      const json& va = it.value();
      const json& vb = jb.at(it.key());
      const bool same = (va.is_number_float() || vb.is_number_float()) &&
                                va.is_number() && vb.is_number()
                            ? close_enough(va.get<double>(), vb.get<double>(), tolerance)
                            : va == vb;
      if (!same) {
        out.push_back("episode " + std::to_string(i) + " (" + a.episodes[i].question_id +
                      ") " + it.key() + ": " + va.dump() + " vs " + vb.dump());
      }
    }
  }
  return out;
}

}  // namespace refrain
