#pragma once

#include <stdexcept>
#include <string>

namespace hgsqz {

// Physics or domain failure: unphysical states, inconsistent measurements,
// unsupported mode orders, non-convergent overlaps. The CLI maps these to
// exit code 1.
class PhysicsError : public std::runtime_error {
 public:
  PhysicsError(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  // Short machine-readable tag, e.g. "unsupported-order".
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Malformed or schema-violating configuration. Exit code 2 in the CLI.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)) {}

  // JSON path of the offending field ("" when not tied to a field).
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace hgsqz
