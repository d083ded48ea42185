#include "quesim/csv.hpp"

#include <istream>
#include <ostream>

#include "quesim/errors.hpp"

namespace quesim {

bool CsvReader::next(std::vector<std::string>& fields) {
  fields.clear();
  int c = in_.get();
  if (c == std::istream::traits_type::eof()) return false;
  ++line_;

  std::string field;
  bool quoted = false;
  for (;;) {
    if (c == std::istream::traits_type::eof()) {
      fields.push_back(std::move(field));
      if (quoted)
        throw DataError("csv: unterminated quoted field at line " +
                        std::to_string(line_));
      return true;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        const int peek = in_.peek();
        if (peek == '"') {
          field.push_back('"');
          in_.get();
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
    } else if (ch == '"' && field.empty()) {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\r') {
      // swallow; handled with the following '\n' (or a bare '\r' terminator)
      if (in_.peek() != '\n') {
        fields.push_back(std::move(field));
        return true;
      }
    } else if (ch == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(ch);
    }
    c = in_.get();
  }
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void csv_write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.put(',');
    out << csv_quote(fields[i]);
  }
  out.put('\n');
}

}  // namespace quesim
