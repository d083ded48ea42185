#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace quesim {

// RFC 4180 style CSV: fields may be double-quoted and contain embedded
// commas, quotes ("" escape) and newlines. Input text is treated as UTF-8
// bytes; no transcoding happens here.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Reads one record. Returns false at end of input.
  bool next(std::vector<std::string>& fields);

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::string csv_quote(const std::string& field);
void csv_write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace quesim
