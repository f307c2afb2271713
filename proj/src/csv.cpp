#include "quadosc/csv.hpp"

#include <charconv>
#include <system_error>

namespace quadosc::csv {

std::string format(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format(std::int64_t v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_row(std::ostream& os, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) os.put(',');
    os << c;
    first = false;
  }
  os.put('\n');
}

}  // namespace quadosc::csv
