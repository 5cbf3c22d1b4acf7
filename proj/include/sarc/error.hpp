#pragma once

#include <stdexcept>
#include <string>

namespace sarc {

/// Broad error classes. The CLI maps each to a process exit code.
enum class ErrorClass { Validation = 2, Io = 3, Convergence = 4, Internal = 5 };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }
  int exit_code() const noexcept { return static_cast<int>(cls_); }

 private:
  ErrorClass cls_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error(ErrorClass::Validation, w) {}
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error(ErrorClass::Validation, "shape error: " + w) {}
};

/// Malformed CSV row; carries the 1-based line number.
struct ParseError : Error {
  ParseError(std::size_t line, const std::string& w)
      : Error(ErrorClass::Validation, "parse error at line " + std::to_string(line) + ": " + w), line(line) {}
  std::size_t line;
};

struct SequencingError : Error {
  explicit SequencingError(const std::string& w) : Error(ErrorClass::Validation, "sequencing error: " + w) {}
};

struct GapError : Error {
  explicit GapError(const std::string& w) : Error(ErrorClass::Validation, "gap error: " + w) {}
};

struct NoActivityError : Error {
  explicit NoActivityError(const std::string& w) : Error(ErrorClass::Validation, "no activity: " + w) {}
};

struct AnnotationMissingError : Error {
  explicit AnnotationMissingError(const std::string& w)
      : Error(ErrorClass::Validation, "annotation missing: " + w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorClass::Io, w) {}
};

struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& w) : Error(ErrorClass::Convergence, w) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace sarc
