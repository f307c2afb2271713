#pragma once

#include <cstdint>
#include <ostream>
#include <string>

namespace quadosc::csv {

/// Shortest decimal form that round-trips the double; locale-independent,
/// dot decimal separator, no trailing zeros.
std::string format(double v);

std::string format(std::int64_t v);

/// Writes "v1,v2,...\n".
void write_row(std::ostream& os, std::initializer_list<std::string> cells);

}  // namespace quadosc::csv
