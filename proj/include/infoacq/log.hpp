#pragma once

#include <atomic>
#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace infoacq {

enum class LogLevel { debug, info, warning };

namespace detail {
inline std::mutex& log_mutex() {
    static std::mutex m;
    return m;
}
inline std::function<void(LogLevel, std::string_view)>& log_sink() {
    static std::function<void(LogLevel, std::string_view)> sink;
    return sink;
}
inline std::atomic<int>& log_threshold() {
    static std::atomic<int> t{static_cast<int>(LogLevel::warning)};
    return t;
}
} // namespace detail

inline void set_log_sink(std::function<void(LogLevel, std::string_view)> sink) {
    std::lock_guard lock(detail::log_mutex());
    detail::log_sink() = std::move(sink);
}

inline void set_log_level(LogLevel level) { detail::log_threshold() = static_cast<int>(level); }

inline void log(LogLevel level, std::string_view msg) {
    if (static_cast<int>(level) < detail::log_threshold()) return;
    std::lock_guard lock(detail::log_mutex());
    if (detail::log_sink()) {
        detail::log_sink()(level, msg);
        return;
    }
    static constexpr const char* names[] = {"debug", "info", "warning"};
    std::clog << "infoacq[" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

// Clamp a sampled nonnegative quantity at zero and keep a trace of the raw value.
inline double clamp_nonnegative(double raw, std::string_view what) {
    if (raw >= 0.0) return raw;
    if (raw < -1e-12)
        log(LogLevel::debug, std::string(what) + " clamped from " + std::to_string(raw));
    return 0.0;
}

} // namespace infoacq
