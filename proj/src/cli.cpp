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

#include "refrain/cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "refrain/dataset.h"
#include "refrain/errors.h"
#include "refrain/harness.h"
#include "refrain/http_backend.h"
#include "refrain/recorder.h"
#include "refrain/report.h"

namespace refrain {
namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DatasetError("'" + path + "' is not valid JSON: " + e.what());
  }
}

// Config file keys are the `run` flags without dashes.
class RunConfigFormat : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    for (auto& item : items) {
      if (item.parents.empty() && item.name != "++" && item.name != "--") {
        item.parents = {"run"};
      }
    }
    return items;
  }
};

// Moves `run --config FILE` ahead of the subcommand, where the reader lives.
std::vector<std::string> hoist_config(std::vector<std::string> args) {
  if (args.size() < 2 || args[1] != "run") return args;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      std::vector<std::string> moved = {args[i], args[i + 1]};
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      args.insert(args.begin() + 1, moved.begin(), moved.end());
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      std::string flag = args[i];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      args.insert(args.begin() + 1, flag);
      break;
    }
  }
  return args;
}

struct HttpOptions {
  std::string preset = "qwen3";
  std::string base_url;
  std::string model;
  std::optional<double> temperature;
  std::optional<double> top_p;
  std::optional<int> top_k;
  int max_tokens = 16384;
  int timeout_ms = 600000;
  int retries = 2;

  void add_to(CLI::App* app) {
    app->add_option("--preset", preset, "Sampling preset")
        ->check(CLI::IsMember(sampling_preset_names()));
    app->add_option("--base-url", base_url, "Generation server (env REFRAIN_BASE_URL)");
    app->add_option("--model", model, "Served model name");
    app->add_option("--temperature", temperature);
    app->add_option("--top-p", top_p);
    app->add_option("--top-k", top_k);
    app->add_option("--max-tokens", max_tokens, "Generation cap")->capture_default_str();
    app->add_option("--timeout-ms", timeout_ms)->capture_default_str();
    app->add_option("--retries", retries)->capture_default_str();
  }

  BackendConfig config() const {
    BackendConfig c = sampling_preset(preset);
    c.base_url = base_url.empty() ? env_or("REFRAIN_BASE_URL", c.base_url) : base_url;
    if (!model.empty()) c.model_name = model;
    if (temperature) c.temperature = *temperature;
    if (top_p) c.top_p = *top_p;
    if (top_k) c.top_k = *top_k;
    c.max_tokens = max_tokens;
    c.timeout_ms = timeout_ms;
    c.retries = retries;
    c.validate();
    return c;
  }
};

struct PromptOptions {
  std::string id = "P0";
  std::string file;

  void add_to(CLI::App* app) {
    app->add_option("--prompt", id, "Built-in prompt template")
        ->check(CLI::IsMember({"P0", "P1", "P2"}))
        ->capture_default_str();
    app->add_option("--prompt-file", file, "Custom template holding {question}");
  }

  PromptTemplate make() const {
    if (!file.empty()) return PromptTemplate::custom(read_file(file));
    return PromptTemplate::builtin(parse_prompt_id(id));
  }
};

struct RunOptions {
  std::string policy = "sw-ucb";
  std::string dataset;
  std::string backend = "replay";
  std::string traces;
  std::string similarity = "embedding_cosine";
  std::string embedder = "hashed";
  std::size_t embed_dim = 8192;
  std::string embed_url;
  std::string embed_model;
  std::size_t embed_remote_dim = 384;
  std::string vocab;
  std::vector<std::string> overlays;
  std::vector<std::string> drop_categories;
  PromptOptions prompt;
  HttpOptions http;
  double tau = 0.70;
  std::optional<int> budget;
  std::string budget_preset;
  double epsilon = 0.1;
  std::size_t window = kDefaultWindow;
  double exploration = kDefaultExploration;
  std::vector<double> taus = default_thresholds();
  double lambda = 0.1;
  double cold_start_coeff = 0.0001;
  std::uint64_t seed = 42;
  std::optional<std::uint64_t> shuffle;
  int jobs = 1;
  std::string out;
  std::string format = "json";
  std::string label;
  std::string bandit_in;
  std::string bandit_out;
};

std::shared_ptr<const SimilarityBackend> build_similarity(const RunOptions& o) {
  const SimilarityKind kind = parse_similarity_kind(o.similarity);
  if (kind != SimilarityKind::kEmbeddingCosine) return make_similarity_backend(kind);
  if (o.embedder == "remote") {
    EmbeddingConfig ec;
    ec.base_url = o.embed_url.empty() ? env_or("REFRAIN_EMBED_URL", ec.base_url) : o.embed_url;
    if (!o.embed_model.empty()) ec.model_name = o.embed_model;
    ec.dimension = o.embed_remote_dim;
    return embedding_cosine_backend(std::make_shared<RemoteEmbedder>(ec));
  }
  return embedding_cosine_backend(hashed_bag_embedder(o.embed_dim));
}

TriggerVocabulary build_vocab(const RunOptions& o) {
  TriggerVocabulary v = o.vocab.empty() ? default_vocabulary() : TriggerVocabulary::load(o.vocab);
  for (const auto& name : o.overlays) v = v.with_overlay(name);
  for (const auto& name : o.drop_categories) v = v.without_category(name);
  return v;
}

int do_run(const RunOptions& o, std::ostream& out) {
  std::shared_ptr<const TraceStore> store;
  if (!o.traces.empty()) store = std::make_shared<TraceStore>(TraceStore::load(o.traces));

  std::vector<Question> dataset;
  if (!o.dataset.empty()) {
    dataset = load_dataset(o.dataset);
  } else if (store) {
    dataset = store->questions();
  } else {
    throw ConfigError("--dataset is required unless --traces is given");
  }

  std::unique_ptr<GenerationBackend> backend;
  if (o.backend == "replay") {
    if (!store) throw ConfigError("--backend replay needs --traces");
    backend = std::make_unique<ReplayBackend>(store);
  } else {
    backend = std::make_unique<HttpBackend>(o.http.config());
  }

  RunConfig cfg;
  cfg.policy.kind = parse_policy_kind(o.policy);
  cfg.policy.tau = o.tau;
  cfg.policy.epsilon = o.epsilon;
  if (cfg.policy.kind == PolicyKind::kBudget) {
    if (!o.budget_preset.empty()) {
      cfg.policy.budget = budget_preset(o.budget_preset);
    } else if (o.budget) {
      cfg.policy.budget = *o.budget;
    } else {
      throw ConfigError("policy budget needs --budget or --budget-preset");
    }
  }
  cfg.taus = o.taus;
  cfg.window = o.window;
  cfg.exploration = o.exploration;
  cfg.reward.lambda = o.lambda;
  cfg.reward.cold_start_coeff = o.cold_start_coeff;
  cfg.seed = o.seed;
  cfg.shuffle_seed = o.shuffle;
  cfg.jobs = o.jobs;
  cfg.dataset = o.dataset.empty() ? o.traces : o.dataset;
  if (!o.bandit_in.empty()) cfg.bandit_state = read_json(o.bandit_in);

  const TriggerVocabulary vocab = build_vocab(o);
  const auto similarity = build_similarity(o);
  EpisodeComponents components{backend.get(), &vocab, similarity.get(), o.prompt.make()};

  BenchmarkReport report = run_benchmark(std::move(dataset), cfg, components);
  const ReportFormat format = parse_report_format(o.format);
  const std::string label = o.label.empty() ? o.policy : o.label;
  const std::string text = render_report(report, format, label);
  if (o.out.empty()) {
    out << text;
  } else {
    write_text_file(o.out, text);
  }
  if (!o.bandit_out.empty()) {
    if (!report.bandit_state) throw ConfigError("policy " + o.policy + " keeps no bandit state");
    write_text_file(o.bandit_out, report.bandit_state->dump(2) + "\n");
  }

  int failed = 0;
  for (const auto& e : report.episodes) failed += e.error ? 1 : 0;
  std::ostream& summary = o.out.empty() ? std::cerr : out;
  summary << "policy=" << o.policy << " questions=" << report.episodes.size()
          << " correct=" << report.correct_count() << " pass_at_1=" << report.pass_at_1
          << " total_tokens=" << report.total_tokens << " failed=" << failed << "\n";
  return 0;
}

struct RecordCliOptions {
  std::string dataset;
  std::string out;
  std::string closures = "none";
  bool no_thinking = false;
  PromptOptions prompt;
  HttpOptions http;
};

RecordOptions parse_closure_spec(const std::string& spec) {
  RecordOptions r;
  if (spec == "all") {
    r.all_closures = true;
  } else if (spec != "none") {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        const int k = std::stoi(item, &used);
        if (used != item.size() || k < 1) throw std::invalid_argument(item);
        r.closure_steps.insert(k);
      } catch (const std::exception&) {
        throw ConfigError("bad --closures entry '" + item + "'");
      }
    }
  }
  return r;
}

int do_record(const RecordCliOptions& o, std::ostream& out) {
  const auto dataset = load_dataset(o.dataset);
  const BackendConfig config = o.http.config();
  HttpBackend backend(config);
  const PromptTemplate prompt = o.prompt.make();
  RecordOptions options = parse_closure_spec(o.closures);
  options.no_thinking = o.no_thinking;
  ClosureFn closer = [&](const Question& q, const std::string& thinking) {
    return http_close(config, prompt.render(q.text), thinking);
  };
  TraceStore store;
  for (const auto& q : dataset) store.add(record_trace(backend, closer, q, prompt, options));
  std::ostringstream os;
  store.write(os);
  write_text_file(o.out, os.str());
  out << "recorded " << store.size() << " traces to " << o.out << "\n";
  return 0;
}

int do_vocab_check(const std::string& path, std::ostream& out) {
  const auto issues = lint_vocabulary(read_json(path));
  int errors = 0;
  for (const auto& issue : issues) {
    const bool error = issue.severity == VocabularyIssue::Severity::kError;
    errors += error ? 1 : 0;
    out << (error ? "error: " : "warning: ") << issue.message << "\n";
  }
  if (errors == 0) {
    const auto vocab = TriggerVocabulary::load(path);
    out << "ok: " << vocab.phrase_count() << " phrases, fingerprint "
        << vocab.fingerprint() << "\n";
  }
  return errors == 0 ? 0 : 1;
}

int do_report_diff(const std::string& a, const std::string& b, double tolerance,
                   std::ostream& out) {
  const auto diffs = diff_reports(load_report(a), load_report(b), tolerance);
  if (diffs.empty()) {
    out << "identical\n";
    return 0;
  }
  for (const auto& d : diffs) out << d << "\n";
  return 1;
}

int do_report_curve(const std::vector<std::string>& files,
                    const std::vector<std::string>& labels, const std::string& path,
                    std::ostream& out) {
  if (!labels.empty() && labels.size() != files.size()) {
    throw ConfigError("--label must be given once per report");
  }
  std::vector<CurvePoint> points;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const std::string label =
        labels.empty() ? std::filesystem::path(files[i]).stem().string() : labels[i];
    points.push_back(curve_point(load_report(files[i]), label));
  }
  const std::string text = curve_points_text(points);
  if (path.empty()) {
    out << text;
  } else {
    write_text_file(path, text);
  }
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reflective-redundancy early stopping for reasoning models", "refrain"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<RunConfigFormat>());
  app.set_config("--config", "", "Key=value file mirroring the run flags");

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run a policy over a dataset");
  run_cmd->add_option("--policy", run.policy, "Stopping policy")
      ->check(CLI::IsMember(policy_kind_names()))
      ->capture_default_str();
  run_cmd->add_option("--dataset", run.dataset, "Question JSONL");
  run_cmd->add_option("--backend", run.backend)
      ->check(CLI::IsMember({"replay", "http"}))
      ->capture_default_str();
  run_cmd->add_option("--traces", run.traces, "Trace store JSONL for replay");
  run_cmd->add_option("--similarity", run.similarity)
      ->check(CLI::IsMember({"embedding_cosine", "tfidf_cosine", "rouge_l"}))
      ->capture_default_str();
  run_cmd->add_option("--embedder", run.embedder)
      ->check(CLI::IsMember({"hashed", "remote"}))
      ->capture_default_str();
  run_cmd->add_option("--embed-dim", run.embed_dim, "Hashed embedder dimension")
      ->capture_default_str();
  run_cmd->add_option("--embed-url", run.embed_url, "Embedding server (env REFRAIN_EMBED_URL)");
  run_cmd->add_option("--embed-model", run.embed_model);
  run_cmd->add_option("--embed-remote-dim", run.embed_remote_dim)->capture_default_str();
  run_cmd->add_option("--vocab", run.vocab, "Vocabulary JSON");
  run_cmd->add_option("--overlay", run.overlays, "Vocabulary overlay to apply");
  run_cmd->add_option("--drop-category", run.drop_categories, "Trigger category to remove");
  run.prompt.add_to(run_cmd);
  run.http.add_to(run_cmd);
  run_cmd->add_option("--tau", run.tau, "Threshold for policy fixed")->capture_default_str();
  run_cmd->add_option("--budget", run.budget, "Thinking-token cap for policy budget");
  run_cmd->add_option("--budget-preset", run.budget_preset)
      ->check(CLI::IsMember(budget_preset_names()));
  run_cmd->add_option("--epsilon", run.epsilon)->capture_default_str();
  run_cmd->add_option("--window", run.window)->capture_default_str();
  run_cmd->add_option("--exploration", run.exploration)->capture_default_str();
  run_cmd->add_option("--taus", run.taus, "Candidate thresholds")->delimiter(',');
  run_cmd->add_option("--lambda", run.lambda)->capture_default_str();
  run_cmd->add_option("--cold-start-coeff", run.cold_start_coeff)->capture_default_str();
  run_cmd->add_option("--seed", run.seed)->capture_default_str();
  run_cmd->add_option("--shuffle", run.shuffle, "Permute questions with this seed");
  run_cmd->add_option("--jobs", run.jobs, "Workers for stateless policies")
      ->capture_default_str();
  run_cmd->add_option("--out", run.out, "Report path (stdout when omitted)");
  run_cmd->add_option("--format", run.format)
      ->check(CLI::IsMember({"json", "csv", "curve"}))
      ->capture_default_str();
  run_cmd->add_option("--label", run.label, "Curve label");
  run_cmd->add_option("--bandit-state-in", run.bandit_in);
  run_cmd->add_option("--bandit-state-out", run.bandit_out);

  RecordCliOptions rec;
  auto* rec_cmd = app.add_subcommand("replay-record", "Capture traces from an HTTP backend");
  rec_cmd->add_option("--dataset", rec.dataset, "Question JSONL")->required();
  rec_cmd->add_option("--out", rec.out, "Trace store JSONL")->required();
  rec_cmd->add_option("--closures", rec.closures, "none, all or comma-separated steps")
      ->capture_default_str();
  rec_cmd->add_flag("--no-thinking", rec.no_thinking, "Also record the no-thinking run");
  rec.prompt.add_to(rec_cmd);
  rec.http.add_to(rec_cmd);

  auto* vocab_cmd = app.add_subcommand("vocab", "Vocabulary tools");
  vocab_cmd->require_subcommand(1);
  std::string vocab_path;
  auto* check_cmd = vocab_cmd->add_subcommand("check", "Lint a vocabulary file");
  check_cmd->add_option("file", vocab_path)->required();
  auto* default_cmd = vocab_cmd->add_subcommand("default", "Print the built-in vocabulary");

  auto* report_cmd = app.add_subcommand("report", "Report tools");
  report_cmd->require_subcommand(1);
  std::string diff_a, diff_b;
  double tolerance = 0.0;
  auto* diff_cmd = report_cmd->add_subcommand("diff", "Compare two JSON reports");
  diff_cmd->add_option("a", diff_a)->required();
  diff_cmd->add_option("b", diff_b)->required();
  diff_cmd->add_option("--tolerance", tolerance, "Allowed float difference");
  std::vector<std::string> curve_files, curve_labels;
  std::string curve_out;
  auto* curve_cmd = report_cmd->add_subcommand("curve", "Tokens versus pass@1 points");
  curve_cmd->add_option("reports", curve_files)->required();
  curve_cmd->add_option("--label", curve_labels);
  curve_cmd->add_option("--out", curve_out);

  const auto hoisted = hoist_config(args);
  std::vector<std::string> argv(hoisted.rbegin(), hoisted.rend());
  if (!argv.empty()) argv.pop_back();  // program name
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return do_run(run, out);
    if (rec_cmd->parsed()) return do_record(rec, out);
    if (check_cmd->parsed()) return do_vocab_check(vocab_path, out);
    if (default_cmd->parsed()) {
      out << default_vocabulary().to_json().dump(2) << "\n";
      return 0;
    }
    if (diff_cmd->parsed()) return do_report_diff(diff_a, diff_b, tolerance, out);
    if (curve_cmd->parsed()) return do_report_curve(curve_files, curve_labels, curve_out, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace refrain
