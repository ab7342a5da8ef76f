#include "doctest.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "sitekit/csv.hpp"

using namespace sitekit;

TEST_CASE("quoting only when needed") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
  CHECK(csv_escape("") == "");
}

TEST_CASE("rows end in CRLF") {
  std::ostringstream os;
  CsvWriter w(os);
  w.row({"a", "b,c"});
  w.row({"1", "2"});
  CHECK(os.str() == "a,\"b,c\"\r\n1,2\r\n");
}

TEST_CASE("numbers use the shortest round-trip form") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(3.0) == "3");
  CHECK(std::stod(format_double(4.854752972273343)) == 4.854752972273343);
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("parse_csv inverts the writer") {
  std::ostringstream os;
  CsvWriter w(os);
  const std::vector<std::vector<std::string>> rows{{"x", "y\"z", "p,q"}, {"", "multi\r\nline", "3"}};
  for (const auto& r : rows) w.row(r);
  CHECK(parse_csv(os.str()) == rows);
  CHECK(parse_csv("a,b\n1,2\n") == std::vector<std::vector<std::string>>{{"a", "b"}, {"1", "2"}});
}
