#include "imputelab/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace imputelab {

namespace {

log_level parse_level() {
  const char* env = std::getenv("IMPUTELAB_LOG");
  if (!env) return log_level::warn;
  std::string s(env);
  if (s == "error") return log_level::error;
  if (s == "warn") return log_level::warn;
  if (s == "info") return log_level::info;
  if (s == "debug") return log_level::debug;
  return log_level::warn;
}

const char* level_tag(log_level level) {
  switch (level) {
    case log_level::error: return "error";
    case log_level::warn: return "warn";
    case log_level::info: return "info";
    case log_level::debug: return "debug";
  }
  return "?";
}

std::mutex log_mutex;

}  // namespace

log_level active_log_level() {
  static log_level level = parse_level();
  return level;
}

void log_message(log_level level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(active_log_level())) return;
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << "[imputelab " << level_tag(level) << "] " << msg << "\n";
}

}  // namespace imputelab
