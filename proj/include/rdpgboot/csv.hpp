#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace rdpgboot {

/// Shortest round-trip decimal form, locale independent. Integral values keep
/// a trailing ".0" so columns read back as reals.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

/// Minimal RFC-4180 writer: header row, comma separator, '\n' line ends,
/// fields quoted only when they contain a comma, quote or newline.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header) : out_(out) {
    std::vector<std::string> h(header.begin(), header.end());
    columns_ = h.size();
    write_row(h);
  }

  class Row {
   public:
    explicit Row(CsvWriter& w) : w_(w) {}
    Row& operator<<(double v) { return push(format_double(v)); }
    Row& operator<<(std::int64_t v) { return push(std::to_string(v)); }
    Row& operator<<(std::uint64_t v) { return push(std::to_string(v)); }
    Row& operator<<(int v) { return push(std::to_string(v)); }
    Row& operator<<(unsigned v) { return push(std::to_string(v)); }
    Row& operator<<(bool v) { return push(v ? "1" : "0"); }
    Row& operator<<(std::string_view v) { return push(std::string(v)); }
    Row& operator<<(const char* v) { return push(std::string(v)); }
    ~Row() { w_.write_row(fields_); }

   private:
    Row& push(std::string s) {
      fields_.push_back(std::move(s));
      return *this;
    }
    CsvWriter& w_;
    std::vector<std::string> fields_;
  };

  Row row() { return Row(*this); }
  std::size_t columns() const noexcept { return columns_; }

 private:
  static std::string quote(const std::string& f) {
    if (f.find_first_of(",\"\n\r") == std::string::npos) return f;
    std::string q = "\"";
    for (char c : f) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }
  void write_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote(fields[i]);
    }
    out_ << '\n';
  }

  std::ostream& out_;
  std::size_t columns_ = 0;
};

}  // namespace rdpgboot
