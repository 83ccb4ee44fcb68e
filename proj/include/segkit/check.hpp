#pragma once

#include <stdexcept>
#include <string>

namespace segkit {

inline void require(bool cond, const std::string& msg) {
    if (!cond) {
        throw std::invalid_argument(msg);
    }
}

} // namespace segkit
