#include "caslab/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace caslab {

namespace {

LogLevel initial_level() {
    LogLevel level = LogLevel::error;
    if (const char* env = std::getenv("CASLAB_LOG")) {
        if (!parse_log_level(env, level)) {
            std::cerr << "caslab: ignoring unknown CASLAB_LOG value '" << env << "'\n";
        }
    }
    return level;
}

std::atomic<int>& level_store() {
    static std::atomic<int> level{static_cast<int>(initial_level())};
    return level;
}

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

const char* name(LogLevel level) {
    switch (level) {
        case LogLevel::error: return "error";
        case LogLevel::info: return "info";
        case LogLevel::debug: return "debug";
    }
    return "?";
}

}  // namespace

bool parse_log_level(const std::string& text, LogLevel& out) {
    if (text == "error") {
        out = LogLevel::error;
    } else if (text == "info") {
        out = LogLevel::info;
    } else if (text == "debug") {
        out = LogLevel::debug;
    } else {
        return false;
    }
    return true;
}

LogLevel log_level() { return static_cast<LogLevel>(level_store().load()); }
void set_log_level(LogLevel level) { level_store().store(static_cast<int>(level)); }

void log_message(LogLevel level, const std::string& message) {
    if (static_cast<int>(level) > level_store().load()) return;
    std::lock_guard<std::mutex> lock(sink_mutex());
    std::cerr << "caslab " << name(level) << ": " << message << '\n';
}

}  // namespace caslab
