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

#include <filesystem>
#include <istream>
#include <vector>

#include "json.hpp"

#include "refrain/trace.h"

namespace refrain {

// Validates and converts one dataset object
// {"id", "question", "gold", "task_kind"}.
Question question_from_json(const nlohmann::json& object);
nlohmann::json question_to_json(const Question& question);

// Reads a JSON-lines dataset. Blank lines are skipped; ids must be unique.
std::vector<Question> read_dataset(std::istream& in);
std::vector<Question> load_dataset(const std::filesystem::path& path);

}  // namespace refrain
