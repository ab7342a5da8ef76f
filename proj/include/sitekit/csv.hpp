#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sitekit {

/// RFC 4180 writer: fields containing a comma, quote, CR or LF are quoted
/// and embedded quotes doubled. Rows end with CRLF.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& os_;
};

std::string csv_escape(std::string_view field);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace sitekit
