#include "riemspline/format.hpp"

#include <charconv>

namespace riemspline {

std::string format_double(double x) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace riemspline
