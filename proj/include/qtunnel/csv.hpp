#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace qtunnel {

/// Shortest decimal string that reads back to the same double ("nan", "inf", "-inf" otherwise).
std::string format_double(double value);

/// Minimal comma-separated writer. Numbers go through format_double.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(std::initializer_list<std::string_view> columns);
  void comment(std::string_view text);

  template <class... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((emit(fields, first)), ...);
    out_ << '\n';
  }

 private:
  void sep(bool& first) {
    if (!first) out_ << ',';
    first = false;
  }
  void emit(double v, bool& first) { sep(first); out_ << format_double(v); }
  void emit(int v, bool& first) { sep(first); out_ << v; }
  void emit(long v, bool& first) { sep(first); out_ << v; }
  void emit(std::size_t v, bool& first) { sep(first); out_ << v; }
  void emit(std::string_view v, bool& first) { sep(first); out_ << v; }
  void emit(const std::string& v, bool& first) { sep(first); out_ << v; }
  void emit(const char* v, bool& first) { sep(first); out_ << v; }

  std::ostream& out_;
};

}  // namespace qtunnel
