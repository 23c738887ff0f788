#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kstream {

enum class ErrorKind {
  bad_input,  // malformed files, unknown entities, invalid arguments
  internal,   // broken invariant inside an algorithm
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error bad_input(const std::string& what) {
  return Error(ErrorKind::bad_input, what);
}

inline Error internal_error(const std::string& what) {
  return Error(ErrorKind::internal, what);
}

inline Error parse_error(std::size_t line, const std::string& what) {
  return Error(ErrorKind::bad_input,
               "line " + std::to_string(line) + ": " + what);
}

}  // namespace kstream
