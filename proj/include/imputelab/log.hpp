#pragma once

#include <string>

namespace imputelab {

enum class log_level { error = 0, warn = 1, info = 2, debug = 3 };

/// Active level, initialised once from the IMPUTELAB_LOG environment variable
/// (error|warn|info|debug, default warn).
log_level active_log_level();

void log_message(log_level level, const std::string& msg);

inline void log_error(const std::string& msg) { log_message(log_level::error, msg); }
inline void log_warn(const std::string& msg) { log_message(log_level::warn, msg); }
inline void log_info(const std::string& msg) { log_message(log_level::info, msg); }
inline void log_debug(const std::string& msg) { log_message(log_level::debug, msg); }

}  // namespace imputelab
