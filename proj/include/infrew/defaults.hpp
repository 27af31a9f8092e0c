#pragma once

#include <cstddef>

namespace infrew {

inline constexpr std::size_t kDefaultRedexDepth = 16;
inline constexpr std::size_t kDefaultTruncation = 32;
inline constexpr std::size_t kDefaultSegments = 8;

} // namespace infrew
