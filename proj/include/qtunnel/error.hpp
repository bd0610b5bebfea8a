#pragma once

#include <stdexcept>
#include <string>

namespace qtunnel {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside an operation's domain (x outside the box, inverted interval, ...).
/// `field` names the offending parameter when there is one.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what, std::string field = {})
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Invalid experiment configuration. `path` is the dotted field path (e.g. geometry.barrier_left).
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Malformed configuration text; `line` and `column` are 1-based.
class ConfigParseError : public ConfigError {
 public:
  ConfigParseError(const std::string& source, int line, int column, const std::string& what)
      : ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(column), what),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Root search ran out of range before finding every requested level.
class SpectrumShortfall : public NumericalError {
 public:
  SpectrumShortfall(int requested, int found, const std::string& what)
      : NumericalError(what), requested_(requested), found_(found) {}
  int requested() const noexcept { return requested_; }
  int found() const noexcept { return found_; }

 private:
  int requested_;
  int found_;
};

}  // namespace qtunnel
