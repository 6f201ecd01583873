#pragma once

#include <array>
#include <cstdint>

// Storage layouts for the edwards25519 arithmetic behind GroupElement. The
// arithmetic itself lives in the core library; nothing here is part of the
// stable API.
namespace f3b::detail {

// Field element mod 2^255-19 in radix 2^51.
struct Fe {
  std::array<std::uint64_t, 5> v{};
};

// Extended twisted Edwards coordinates: x = X/Z, y = Y/Z, xy = T/Z.
struct ExtendedPoint {
  Fe X, Y, Z, T;
};

// Precomputed addend form: (Y+X, Y-X, 2Z, 2dT).
struct CachedPoint {
  Fe YplusX, YminusX, Z2, T2d;
};

}  // namespace f3b::detail
