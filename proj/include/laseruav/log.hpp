#pragma once

#include <iostream>
#include <sstream>
#include <string>

namespace laseruav::log {

enum class Level { kQuiet = 0, kInfo = 1, kDebug = 2 };

/// Read once from LASERUAV_LOG (0 quiet, 1 info, 2 debug); defaults to quiet.
Level level();
void set_level(Level lvl);

void write(Level lvl, const std::string& msg);

template <typename... Args>
void info(Args&&... args) {
  if (level() < Level::kInfo) return;
  std::ostringstream ss;
  (ss << ... << args);
  write(Level::kInfo, ss.str());
}

template <typename... Args>
void debug(Args&&... args) {
  if (level() < Level::kDebug) return;
  std::ostringstream ss;
  (ss << ... << args);
  write(Level::kDebug, ss.str());
}

}  // namespace laseruav::log
