#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace stylegraph {

// Broad failure classes. The CLI maps these onto exit codes 1, 2 and 3.
enum class ErrorKind { kValidation, kIo, kInvariant };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::kValidation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what)
      : Error(ErrorKind::kInvariant, what) {}
};

/// Malformed record in a line-delimited input file. `line()` is 1-based.
class ParseError : public ValidationError {
 public:
  ParseError(std::string file, std::size_t line, const std::string& detail)
      : ValidationError(file + ":" + std::to_string(line) + ": " + detail),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// Reference to an id that does not exist. Carries every offending id.
class DanglingReferenceError : public ValidationError {
 public:
  DanglingReferenceError(const std::string& what, std::vector<std::string> ids)
      : ValidationError(what), ids_(std::move(ids)) {}

  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
};

class DimensionMismatchError : public ValidationError {
 public:
  DimensionMismatchError(const std::string& what, std::size_t expected,
                         std::size_t actual)
      : ValidationError(what), expected_(expected), actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// An image has no expert votes, so it has no ground-truth style.
class NoLabelError : public ValidationError {
 public:
  explicit NoLabelError(const std::string& image_id)
      : ValidationError("image '" + image_id + "' has no style votes"),
        image_id_(image_id) {}

  const std::string& image_id() const noexcept { return image_id_; }

 private:
  std::string image_id_;
};

}  // namespace stylegraph
