#include "agesched/errors.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace agesched {

namespace {

std::mutex g_handler_mutex;

std::function<void(const std::string&)>& handler_slot() {
    static std::function<void(const std::string&)> handler;
    return handler;
}

} // namespace

void set_warning_handler(std::function<void(const std::string&)> handler) {
    std::lock_guard<std::mutex> lock(g_handler_mutex);
    handler_slot() = std::move(handler);
}

void emit_warning(const std::string& message) {
    std::function<void(const std::string&)> handler;
    {
        std::lock_guard<std::mutex> lock(g_handler_mutex);
        handler = handler_slot();
    }
    if (handler) {
        handler(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

} // namespace agesched
