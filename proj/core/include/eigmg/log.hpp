#pragma once

#include <sstream>
#include <string_view>

namespace eigmg::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

/// Current threshold. Initialised once from the EIGMG_LOG environment variable
/// (error|warn|info|debug, default warn).
Level threshold();
void set_threshold(Level level);

void write(Level level, std::string_view message);

template <class... Args>
void emit(Level level, const Args&... args) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  std::ostringstream os;
  (os << ... << args);
  write(level, os.str());
}

template <class... Args> void error(const Args&... args) { emit(Level::error, args...); }
template <class... Args> void warn(const Args&... args) { emit(Level::warn, args...); }
template <class... Args> void info(const Args&... args) { emit(Level::info, args...); }
template <class... Args> void debug(const Args&... args) { emit(Level::debug, args...); }

}  // namespace eigmg::log
