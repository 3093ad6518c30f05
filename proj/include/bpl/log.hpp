#pragma once

// Minimal leveled logging to stderr, level taken from the BPL_LOG environment
// variable (error, warn, info, debug; default warn).

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

namespace bpl::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline Level parse_level(const char* s) {
  if (!s) return Level::Warn;
  const std::string v(s);
  if (v == "error" || v == "0") return Level::Error;
  if (v == "info" || v == "2") return Level::Info;
  if (v == "debug" || v == "3") return Level::Debug;
  return Level::Warn;
}

inline Level& threshold() {
  static Level level = parse_level(std::getenv("BPL_LOG"));
  return level;
}

inline bool enabled(Level l) { return static_cast<int>(l) <= static_cast<int>(threshold()); }

template <class... Args>
void write(Level l, const char* tag, const Args&... args) {
  if (!enabled(l)) return;
  std::ostringstream os;
  os << "[bpl " << tag << "] ";
  (os << ... << args);
  os << '\n';
  std::cerr << os.str();
}

template <class... Args>
void error(const Args&... a) { write(Level::Error, "error", a...); }
template <class... Args>
void warn(const Args&... a) { write(Level::Warn, "warn", a...); }
template <class... Args>
void info(const Args&... a) { write(Level::Info, "info", a...); }
template <class... Args>
void debug(const Args&... a) { write(Level::Debug, "debug", a...); }

}  // namespace bpl::log
