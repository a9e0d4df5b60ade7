#pragma once

#include <stdexcept>
#include <string>

namespace hybridqc {

// Each error family maps to one process exit code of the command-line tool.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept = 0;
};

class ValidationError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

class ConfigError : public ValidationError {
 public:
  ConfigError(int line, std::string field, const std::string& message)
      : ValidationError(format(line, field, message)), line_(line), field_(std::move(field)) {}
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(int line, const std::string& field, const std::string& message) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "field '" + field + "': ";
    return out + message;
  }
  int line_;
  std::string field_;
};

class NumericError : public Error {
 public:
  NumericError(const std::string& message, double worst_error = 0.0)
      : Error(message), worst_error_(worst_error) {}
  int exit_code() const noexcept override { return 2; }
  double worst_error() const noexcept { return worst_error_; }

 private:
  double worst_error_;
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

}  // namespace hybridqc
