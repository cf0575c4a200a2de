#include "debunk/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace debunk {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

LogSink& current_sink() {
  static LogSink sink = [](LogLevel level, std::string_view message) {
    const char* tag = level == LogLevel::Warning ? "warning" : level == LogLevel::Notice ? "notice" : "info";
    std::cerr << "[debunk " << tag << "] " << message << '\n';
  };
  return sink;
}

}  // namespace

LogSink set_log_sink(LogSink sink) {
  std::lock_guard lock(sink_mutex());
  return std::exchange(current_sink(), std::move(sink));
}

void log(LogLevel level, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (current_sink()) current_sink()(level, message);
}

}  // namespace debunk
