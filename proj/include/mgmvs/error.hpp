#pragma once

#include <stdexcept>
#include <string>

namespace mgmvs {

enum class ErrorKind {
  InvalidConfig,
  BehindCamera,
  DegenerateFit,
  EmptySelection,
  EmptyMask,
  EmptyCloud,
  Io,
  MalformedPly,
  MalformedFile,
  Config,
};

const char* to_string(ErrorKind kind);

// Process exit code used by the command line tool for each error category.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  // The text without the category prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::BehindCamera: return "BehindCamera";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::EmptyCloud: return "EmptyCloud";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::MalformedPly: return "MalformedPly";
    case ErrorKind::MalformedFile: return "MalformedFile";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Error";
}

inline int exit_code(ErrorKind kind) {
  return 10 + static_cast<int>(kind);
}

}  // namespace mgmvs
