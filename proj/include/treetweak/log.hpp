/*
 * Copyright 2026 The treetweak Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Minimal leveled logging to stderr. The threshold is read once from the
// TREETWEAK_LOG environment variable (error|warn|info|debug, default warn).

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>

namespace treetweak::log {

enum class Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

inline Level parse_level(std::string_view text) {
  if (text == "error") return Level::kError;
  if (text == "info") return Level::kInfo;
  if (text == "debug") return Level::kDebug;
  return Level::kWarn;
}

inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("TREETWEAK_LOG");
    return env == nullptr ? Level::kWarn : parse_level(env);
  }();
  return level;
}

inline bool enabled(Level level) { return level <= threshold(); }

template <typename... Args>
void write(Level level, const Args&... args) {
  if (!enabled(level)) return;
  static constexpr std::string_view kTags[] = {"error", "warn", "info",
                                               "debug"};
  std::ostringstream line;
  line << "[treetweak " << kTags[static_cast<int>(level)] << "] ";
  (line << ... << args);
  line << '\n';
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << line.str();
}

template <typename... Args>
void warn(const Args&... args) {
  write(Level::kWarn, args...);
}
template <typename... Args>
void info(const Args&... args) {
  write(Level::kInfo, args...);
}
template <typename... Args>
void debug(const Args&... args) {
  write(Level::kDebug, args...);
}

}  // namespace treetweak::log
