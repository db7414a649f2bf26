#ifndef VEER_ERRORS_HPP
#define VEER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace veer {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", col " + std::to_string(column) +
                           ": " + what),
        line(line),
        column(column) {}
  int line;
  int column;
};

}  // namespace veer

#endif
