#include "coshare/text.hpp"

#include <charconv>

namespace coshare {

std::string format_double(double value) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec; // 32 bytes always fit the shortest form
    return std::string(buf, end);
}

} // namespace coshare
