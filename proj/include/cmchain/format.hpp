#ifndef CMCHAIN_FORMAT_HPP
#define CMCHAIN_FORMAT_HPP

#include <cstdio>
#include <string>

namespace cmchain {

/// 17 significant digits: round-trip exact for IEEE doubles.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace cmchain

#endif  // CMCHAIN_FORMAT_HPP
