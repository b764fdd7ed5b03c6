#ifndef SLIPINV_VERSION_HPP
#define SLIPINV_VERSION_HPP

namespace slipinv {
inline constexpr const char* kVersion = "0.1.0";
}

#endif
