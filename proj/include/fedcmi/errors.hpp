#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fedcmi {

// All failure conditions in this library are configuration or usage mistakes,
// so they throw. The kind string is stable and machine-parseable; the CLI
// prints errors as "error: <kind>: <message>".
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& m) : Error("shape", m) {}
};

struct ParamError : Error {
  explicit ParamError(const std::string& m) : Error("param", m) {}
};

struct IndexError : Error {
  explicit IndexError(const std::string& m) : Error("index", m) {}
};

struct UsageError : Error {
  explicit UsageError(const std::string& m) : Error("usage", m) {}
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error("io", m) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};

struct CompareError : Error {
  explicit CompareError(const std::string& m) : Error("compare", m) {}
};

}  // namespace fedcmi
