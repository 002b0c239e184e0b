#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace neurolock {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the byte offset (EDF) or row/column (CSV)
/// where parsing failed; unknown positions are reported as npos.
class ParseError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit ParseError(const std::string& what, std::size_t offset = npos,
                      std::size_t row = npos, std::size_t col = npos)
      : Error(what), offset_(offset), row_(row), col_(col) {}

  std::size_t offset() const noexcept { return offset_; }
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t offset_;
  std::size_t row_;
  std::size_t col_;
};

class EmptyRecording : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};
class LengthError : public Error {
 public:
  using Error::Error;
};
class DegenerateSignal : public Error {
 public:
  using Error::Error;
};
class ConvergenceError : public Error {
 public:
  using Error::Error;
};
class DegenerateGraph : public Error {
 public:
  using Error::Error;
};
class DisconnectedGraph : public Error {
 public:
  using Error::Error;
};
class ShapeError : public Error {
 public:
  using Error::Error;
};
class IncompatibleTemplates : public Error {
 public:
  using Error::Error;
};
class ObjectiveError : public Error {
 public:
  using Error::Error;
};
class SingularityError : public Error {
 public:
  using Error::Error;
};

}  // namespace neurolock
