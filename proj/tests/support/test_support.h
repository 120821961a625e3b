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
#include <string>

namespace refrain::testing {

inline std::filesystem::path source_dir() { return REFRAIN_SOURCE_DIR; }

inline std::filesystem::path corpus_dir() { return source_dir() / "data" / "mini_corpus"; }

inline std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "refrain_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace refrain::testing
