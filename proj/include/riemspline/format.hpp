#ifndef RIEMSPLINE_FORMAT_HPP
#define RIEMSPLINE_FORMAT_HPP

#include <string>

namespace riemspline {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double x);

}  // namespace riemspline

#endif
