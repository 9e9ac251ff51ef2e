#include "intelguard/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace intelguard::log {

namespace {

Level initial_level() {
    const char* env = std::getenv("INTELGUARD_LOG");
    if (!env) return Level::Warn;
    const std::string v(env);
    if (v == "debug") return Level::Debug;
    if (v == "info") return Level::Info;
    if (v == "error") return Level::Error;
    if (v == "off") return Level::Off;
    return Level::Warn;
}

std::atomic<Level>& threshold() {
    static std::atomic<Level> value{initial_level()};
    return value;
}

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

const char* name(Level l) {
    switch (l) {
        case Level::Debug: return "debug";
        case Level::Info: return "info";
        case Level::Warn: return "warn";
        case Level::Error: return "error";
        case Level::Off: break;
    }
    return "";
}

}  // namespace

void set_level(Level l) { threshold().store(l); }

Level level() { return threshold().load(); }

void write(Level l, std::string_view component, std::string_view message) {
    if (l < threshold().load() || l == Level::Off) return;
    std::lock_guard<std::mutex> lock(sink_mutex());
    std::clog << "[" << name(l) << "] " << component << ": " << message << '\n';
}

}  // namespace intelguard::log
