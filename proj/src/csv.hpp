#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "sawsim/core.hpp"

namespace sawsim::detail {

// Shortest round-trip decimal form; '.' decimal point, no locale.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw error("cannot open for writing: " + path);
  }

  void header(const std::vector<std::string>& cols) { line(cols); }

  void line(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }

  static std::string num(double v) { return format_double(v); }
  static std::string num(int v) { return std::to_string(v); }
  static std::string num(long v) { return std::to_string(v); }
  static std::string num(std::size_t v) { return std::to_string(v); }
  static std::string num(std::uint64_t v) { return std::to_string(v); }

 private:
  std::ofstream out_;
};

}  // namespace sawsim::detail
