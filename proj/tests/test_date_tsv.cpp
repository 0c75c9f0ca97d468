#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "kgr/date.hpp"
#include "kgr/error.hpp"
#include "kgr/tsv.hpp"

using kgr::Date;

TEST_CASE("date parsing") {
  CHECK(Date::parse("2019-01-01")->str() == "2019-01-01");
  CHECK(Date::parse("2015")->str() == "2015-01-01");
  CHECK(Date::parse("2020-02-29").has_value());
  CHECK_FALSE(Date::parse("2019-02-29").has_value());
  CHECK_FALSE(Date::parse("2019-13-01").has_value());
  CHECK_FALSE(Date::parse("2019-1-01").has_value());
  CHECK_FALSE(Date::parse("").has_value());
  CHECK_FALSE(Date::parse("abcd").has_value());
  CHECK(Date::from_ymd(2019, 1, 1).days_since_epoch() == 17897);
  CHECK(Date::from_ymd(2021, 1, 1).days_since_epoch() == 18628);
  CHECK_THROWS_AS(Date::from_ymd(2019, 2, 30), kgr::ValidationError);
  CHECK(Date::from_ymd(2019, 6, 3) < Date::from_ymd(2019, 6, 4));
}

TEST_CASE("tsv helpers") {
  CHECK(kgr::tsv::split("a\tb\t\tc\r") == std::vector<std::string_view>{"a", "b", "", "c"});
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(kgr::tsv::parse_double(kgr::tsv::format_double(v)) == v);
  }
  CHECK_FALSE(kgr::tsv::parse_double("0.5x").has_value());
  CHECK_FALSE(kgr::tsv::parse_double("").has_value());
  CHECK(kgr::tsv::parse_int("42") == 42);
  CHECK_FALSE(kgr::tsv::parse_int("4.2").has_value());
}
