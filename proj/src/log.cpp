#include "laseruav/log.hpp"

#include <atomic>
#include <cstdlib>
#include <mutex>

namespace laseruav::log {

namespace {

Level from_env() {
  const char* env = std::getenv("LASERUAV_LOG");
  if (!env) return Level::kQuiet;
  const int v = std::atoi(env);
  if (v >= 2) return Level::kDebug;
  if (v == 1) return Level::kInfo;
  return Level::kQuiet;
}

std::atomic<int>& current() {
  static std::atomic<int> lvl{static_cast<int>(from_env())};
  return lvl;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Level level() { return static_cast<Level>(current().load(std::memory_order_relaxed)); }

void set_level(Level lvl) { current().store(static_cast<int>(lvl)); }

void write(Level lvl, const std::string& msg) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  std::cerr << (lvl == Level::kDebug ? "[debug] " : "[info] ") << msg << '\n';
}

}  // namespace laseruav::log
