#include "wavekin/warnings.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace wavekin {

namespace {

std::mutex g_mutex;
std::function<void(const std::string&)> g_handler;

} // namespace

void warn(const std::string& message) {
    std::lock_guard<std::mutex> lock(g_mutex);
    if (g_handler) {
        g_handler(message);
    } else {
        std::cerr << "warning: " << message << "\n";
    }
}

void set_warning_handler(std::function<void(const std::string&)> handler) {
    std::lock_guard<std::mutex> lock(g_mutex);
    g_handler = std::move(handler);
}

} // namespace wavekin
