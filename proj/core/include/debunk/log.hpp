#pragma once

#include <functional>
#include <string_view>

namespace debunk {

enum class LogLevel { Info, Notice, Warning };

using LogSink = std::function<void(LogLevel, std::string_view)>;

// Replaces the process-wide sink; returns the previous one. The default sink
// writes to stderr. Pass an empty function to silence logging.
LogSink set_log_sink(LogSink sink);

void log(LogLevel level, std::string_view message);
inline void log_info(std::string_view m) { log(LogLevel::Info, m); }
inline void log_notice(std::string_view m) { log(LogLevel::Notice, m); }
inline void log_warning(std::string_view m) { log(LogLevel::Warning, m); }

}  // namespace debunk
