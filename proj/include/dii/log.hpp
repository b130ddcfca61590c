#pragma once

#include <cstdlib>
#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>

namespace dii::log {

enum class Level { quiet = 0, warn = 1, info = 2, debug = 3 };

/// Verbosity is read once from the DII_LOG environment variable
/// (quiet|warn|info|debug, default warn).
inline Level level_from_env() {
  const char* raw = std::getenv("DII_LOG");
  if (raw == nullptr) return Level::warn;
  const std::string_view v{raw};
  if (v == "quiet" || v == "0") return Level::quiet;
  if (v == "info" || v == "2") return Level::info;
  if (v == "debug" || v == "3") return Level::debug;
  return Level::warn;
}

using Sink = std::function<void(Level, std::string_view)>;

namespace detail {

struct State {
  std::mutex mutex;
  Level level = level_from_env();
  Sink sink;
};

inline State& state() {
  static State s;
  return s;
}

}  // namespace detail

inline void set_level(Level level) {
  std::scoped_lock lock{detail::state().mutex};
  detail::state().level = level;
}

/// Replaces the stderr writer. Returns the previous sink (empty means stderr).
inline Sink set_sink(Sink sink) {
  std::scoped_lock lock{detail::state().mutex};
  return std::exchange(detail::state().sink, std::move(sink));
}

inline void write(Level level, std::string_view message) {
  auto& s = detail::state();
  std::scoped_lock lock{s.mutex};
  if (s.sink) {
    s.sink(level, message);
    return;
  }
  if (level > s.level) return;
  static constexpr const char* tags[] = {"", "warning", "info", "debug"};
  std::cerr << "[dii " << tags[static_cast<int>(level)] << "] " << message << '\n';
}

inline void warn(std::string_view message) { write(Level::warn, message); }
inline void info(std::string_view message) { write(Level::info, message); }
inline void debug(std::string_view message) { write(Level::debug, message); }

}  // namespace dii::log
