#pragma once

#include <stdexcept>
#include <string>

namespace sdkit {

/// A model or scenario that cannot be simulated as given.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A rate or stock became NaN or infinite.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(double time, std::string variable, const std::string& detail)
      : std::runtime_error("numerical failure at t=" + std::to_string(time) + " in " + variable +
                           ": " + detail),
        time_(time),
        variable_(std::move(variable)) {}

  double time() const { return time_; }
  const std::string& variable() const { return variable_; }

 private:
  double time_;
  std::string variable_;
};

/// Malformed scenario document; `key` is the JSON path of the offending entry.
class ScenarioFormatError : public std::runtime_error {
 public:
  ScenarioFormatError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class MissingColumn : public std::out_of_range {
 public:
  explicit MissingColumn(const std::string& name)
      : std::out_of_range("no column named '" + name + "'"), name_(name) {}

  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class HorizonMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sdkit
