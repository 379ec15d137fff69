#pragma once

#include <stdexcept>
#include <string>

namespace mcnb {

// Base for all project errors. `kind` is a stable machine-readable tag
// surfaced in CLI error JSON; `what()` carries the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class DimensionError : public Error {
 public:
  DimensionError(const std::string& where, std::size_t expected,
                 std::size_t actual)
      : Error("dimension_mismatch",
              where + ": expected size " + std::to_string(expected) +
                  ", got " + std::to_string(actual)) {}
};

// Invalid or unknown configuration field. `field` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& msg)
      : Error("config_error", "config field '" + field + "': " + msg),
        field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error("io_error", msg) {}
};

class DataFormatError : public Error {
 public:
  explicit DataFormatError(const std::string& msg)
      : Error("data_format_error", msg) {}
};

// Synthetic generator could not certify the separation requirement.
class GapCertificationError : public Error {
 public:
  explicit GapCertificationError(const std::string& msg)
      : Error("gap_certification_failed", msg) {}
};

}  // namespace mcnb
