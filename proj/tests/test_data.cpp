#include <doctest.h>

#include <sstream>

#include "atise/data.hpp"
#include "atise/error.hpp"

using namespace atise;

namespace {

RawFact point(const std::string& s, const std::string& p, const std::string& o, const std::string& date) {
  return {s, p, o, PointTime{parse_full_date(date)}};
}

RawFact interval(const std::string& s, const std::string& p, const std::string& o, const std::string& start,
                 const std::string& end) {
  return {s, p, o, IntervalTime{parse_partial_date(start), parse_partial_date(end)}};
}

}  // namespace

TEST_SUITE("data") {
  TEST_CASE("full dates are validated against the calendar") {
    const Date d = parse_full_date("2014-02-28");
    CHECK(d.year == 2014);
    CHECK(d.month == 2);
    CHECK(d.day == 28);
    CHECK_THROWS_AS(parse_full_date("2014-02-29"), DataError);
    CHECK_NOTHROW(parse_full_date("2012-02-29"));
    CHECK_THROWS_AS(parse_full_date("2014-13-01"), DataError);
    CHECK_THROWS_AS(parse_full_date("2014/01/01"), DataError);
  }

  TEST_CASE("partial dates keep what is known") {
    const auto year_only = parse_partial_date("1987-##-##");
    REQUIRE(year_only);
    CHECK(year_only->year == 1987);
    CHECK_FALSE(year_only->month);
    CHECK_FALSE(parse_partial_date("####-##-##"));
    CHECK(format_date(parse_partial_date("0012-##-##")) == "0012-##-##");
    CHECK(format_date(std::nullopt) == "####-##-##");
  }

  TEST_CASE("point files parse tab-separated quadruples") {
    std::istringstream in("a\tlikes\tb\t2014-01-02\n\n c \tlikes\ta\t2014-01-05\n");
    const auto facts = parse_point_file(in);
    REQUIRE(facts.size() == 2);
    CHECK(facts[1].subject == "c");
    CHECK(std::get<PointTime>(facts[1].time).date == Date{2014, 1, 5});
  }

  TEST_CASE("malformed lines report their line number") {
    std::istringstream in("a\tlikes\tb\t2014-01-02\n\na\tlikes\tb\n");
    try {
      parse_point_file(in);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.with_source("train.txt").what()).find("train.txt:3") == 0);
    }
    std::istringstream bad_date("a\tr\tb\t2014-02-30\n");
    CHECK_THROWS_AS(parse_point_file(bad_date), ParseError);
  }

  TEST_CASE("interval files accept unknown endpoints") {
    std::istringstream in("a\tspouse\tb\t1990-##-##\t####-##-##\n");
    const auto facts = parse_interval_file(in);
    REQUIRE(facts.size() == 1);
    const auto& t = std::get<IntervalTime>(facts[0].time);
    CHECK(t.start->year == 1990);
    CHECK_FALSE(t.end);
  }

  TEST_CASE("format_fact_line round-trips through the parser") {
    const std::vector<RawFact> facts = {interval("a", "r", "b", "1990-##-##", "####-##-##"),
                                        interval("c", "r", "a", "2001-03-##", "2003-##-##")};
    std::string text;
    for (const auto& f : facts) text += format_fact_line(f);
    std::istringstream in(text);
    CHECK(parse_interval_file(in) == facts);
  }

  TEST_CASE("day timeline spans first to last date") {
    const std::vector<RawFact> facts = {point("a", "r", "b", "2014-01-03"), point("a", "r", "b", "2014-12-31")};
    const Timeline t = build_timeline(facts, Granularity::kDay);
    CHECK(t.n_steps == 363);
    CHECK(t.step_of(Date{2014, 1, 3}) == 0);
    CHECK(t.step_of(Date{2014, 3, 1}) == 57);
    CHECK(t.step_of(Date{2013, 6, 1}) == 0);
    CHECK(t.step_of(Date{2015, 6, 1}) == 362);
  }

  TEST_CASE("year bins balance fact counts greedily") {
    // Years 2000..2005 with endpoint counts 4, 1, 1, 1, 1, 4 (12 in total).
    std::vector<RawFact> facts;
    const int counts[] = {4, 1, 1, 1, 1, 4};
    for (int y = 0; y < 6; ++y) {
      for (int i = 0; i < counts[y]; ++i) {
        facts.push_back({"a", "r", "b", IntervalTime{Date{2000 + y, {}, {}}, std::nullopt}});
      }
    }
    const Timeline t = build_timeline(facts, Granularity::kYearBinned, 3);
    CHECK(t.n_steps == 3);
    // Cumulative 4 reaches 12/3 after 2000; 8 is reached only after 2004.
    CHECK(t.bin_bounds == std::vector<std::int32_t>{2000, 2001, 2005});
    CHECK(t.step_of(Date{1990, {}, {}}) == 0);
    CHECK(t.step_of(Date{2003, {}, {}}) == 1);
    CHECK(t.step_of(Date{2030, {}, {}}) == 2);
    CHECK_THROWS_AS(build_timeline(facts, Granularity::kYearBinned, 7), DataError);
    const Timeline each = build_timeline(facts, Granularity::kYearBinned, 6);
    CHECK(each.bin_bounds == std::vector<std::int32_t>{2000, 2001, 2002, 2003, 2004, 2005});
  }

  TEST_CASE("vocabulary follows first appearance") {
    const std::vector<RawFact> train = {point("x", "r1", "y", "2014-01-01")};
    const std::vector<RawFact> valid = {point("z", "r2", "x", "2014-01-02")};
    const std::vector<RawFact> test = {point("w", "r1", "z", "2014-01-03")};
    const DatasetBundle b = make_bundle(train, valid, test, {}, true);
    CHECK(b.vocab.entities() == std::vector<std::string>{"x", "y", "z", "w"});
    CHECK(b.vocab.relations() == std::vector<std::string>{"r1", "r2"});
    CHECK(b.vocab.relation_space() == 4);
    CHECK(b.vocab.relation_label(3) == "r2^-1");
    CHECK(b.test[0] == IntervalFact{3, 0, 2, 2, 2});
    CHECK_THROWS_AS(b.vocab.entity_id("nobody"), DataError);
  }

  TEST_CASE("intervals discretize with open ends") {
    const std::vector<RawFact> facts = {interval("a", "r", "b", "2000-##-##", "2002-##-##"),
                                        interval("a", "r", "c", "####-##-##", "2001-##-##"),
                                        interval("b", "r", "c", "2003-##-##", "####-##-##")};
    const DatasetBundle b = make_bundle(facts, {}, {}, {Granularity::kYearBinned, 4}, false);
    CHECK(b.train[0] == IntervalFact{0, 0, 1, 0, 2});
    CHECK(b.train[1] == IntervalFact{0, 0, 2, 0, 1});
    CHECK(b.train[2] == IntervalFact{1, 0, 2, 3, 3});
    CHECK(expand_interval(b.train[0]).size() == 3);
    CHECK(expand_all(b.train).size() == 6);
  }

  TEST_CASE("reversed intervals are data errors") {
    const std::vector<RawFact> facts = {interval("a", "r", "b", "2005-##-##", "2001-##-##")};
    CHECK_THROWS_AS(make_bundle(facts, {}, {}, {Granularity::kYearBinned, 2}, false), DataError);
  }

  TEST_CASE("stats report counts every split") {
    const std::vector<RawFact> train = {point("a", "r", "b", "2014-01-01"), point("b", "r", "c", "2014-01-04")};
    const std::vector<RawFact> test = {point("a", "q", "c", "2014-01-02")};
    const auto stats = dataset_stats(make_bundle(train, {}, test, {}, false));
    CHECK(format_stats_report(stats) ==
          "entities\t3\nrelations\t2\ntime_steps\t4\ntrain\t2\nvalid\t0\ntest\t1\n");
  }
}
