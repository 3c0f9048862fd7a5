#ifndef ONE_VERSION_HPP
#define ONE_VERSION_HPP

namespace one {
inline constexpr const char* kVersion = "0.1.0";
}

#endif  // ONE_VERSION_HPP
