#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace filesafe {

// Root of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, std::string expected)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": syntax error: expected " + expected),
        line_(line),
        column_(column),
        expected_(std::move(expected)) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string expected_;
};

// Read form does not match the language mode, or an operation was asked of
// a program in the wrong mode.
class ModeError : public Error {
 public:
  using Error::Error;
};

class NestedForkError : public Error {
 public:
  using Error::Error;
};

class MissingFileError : public Error {
 public:
  explicit MissingFileError(const std::string& file)
      : Error("no store entry for file '" + file + "'"), file_(file) {}
  const std::string& file() const noexcept { return file_; }

 private:
  std::string file_;
};

class UnknownFileError : public Error {
 public:
  explicit UnknownFileError(const std::string& file) : Error("unknown file '" + file + "'"), file_(file) {}
  const std::string& file() const noexcept { return file_; }

 private:
  std::string file_;
};

class InvalidTraceError : public Error {
 public:
  using Error::Error;
};

// Malformed filesystem description or report document.
class SpecError : public Error {
 public:
  SpecError(std::string key, const std::string& what)
      : Error("filesystem spec: '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace filesafe
