#pragma once

#include <stdexcept>
#include <string>

namespace stereodiff {

struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

[[noreturn]] inline void fail(const std::string& msg) {
    throw error(msg);
}

inline void check(bool cond, const std::string& msg) {
    if (!cond) fail(msg);
}

} // namespace stereodiff
