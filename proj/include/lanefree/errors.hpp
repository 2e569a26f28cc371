#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lanefree {

/// Thrown when a state leaves the admissible set (collision, off-road,
/// orientation or speed bound), i.e. the feedback laws are undefined there.
class IntegrityError : public std::runtime_error {
 public:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  IntegrityError(const std::string& what, std::size_t vehicle = kNone,
                 std::size_t other = kNone)
      : std::runtime_error(what), vehicle_(vehicle), other_(other) {}

  std::size_t vehicle() const noexcept { return vehicle_; }
  std::size_t other() const noexcept { return other_; }

 private:
  std::size_t vehicle_;
  std::size_t other_;
};

/// Bad configuration value or file. `key` is the dotted config key, `line`
/// the 1-based source line when the config came from a text file (0 otherwise).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string key = {}, int line = 0)
      : std::runtime_error(what), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace lanefree
