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

#include "refrain/dataset.h"

#include <fstream>
#include <string>
#include <unordered_set>

#include "refrain/errors.h"

namespace refrain {
namespace {

std::string required_string(const nlohmann::json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end() || !it->is_string()) {
    throw DatasetError(std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

Question question_from_json(const nlohmann::json& object) {
  if (!object.is_object()) throw DatasetError("dataset line is not an object");
  Question q;
  q.id = required_string(object, "id");
  q.text = required_string(object, "question");
  q.gold = std::string(trim(required_string(object, "gold")));
  q.task_kind = parse_task_kind(required_string(object, "task_kind"));

  if (q.id.empty()) throw DatasetError("question id is empty");
  if (q.gold.empty()) throw DatasetError("question '" + q.id + "': empty gold");
  if (q.task_kind == TaskKind::kMultipleChoice &&
      (q.gold.size() != 1 || q.gold[0] < 'A' || q.gold[0] > 'E')) {
    throw DatasetError("question '" + q.id +
                       "': multiple_choice gold must be one letter A-E");
  }
  return q;
}

nlohmann::json question_to_json(const Question& question) {
  return {{"id", question.id},
          {"question", question.text},
          {"gold", question.gold},
          {"task_kind", std::string(to_string(question.task_kind))}};
}

std::vector<Question> read_dataset(std::istream& in) {
  std::vector<Question> questions;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Question q;
    try {
      q = question_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DatasetError& e) {
      throw DatasetError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen.insert(q.id).second) {
      throw DatasetError("duplicate question id '" + q.id + "'");
    }
    questions.push_back(std::move(q));
  }
  return questions;
}

std::vector<Question> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path.string());
  return read_dataset(in);
}

}  // namespace refrain
