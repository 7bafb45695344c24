#include "atise/data.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>

#include "atise/error.hpp"

namespace atise {
namespace {

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n' && c != '\v' && c != '\f'; };
  auto begin = std::find_if(s.begin(), s.end(), not_space);
  auto end = std::find_if(s.rbegin(), s.rend(), not_space).base();
  return begin < end ? std::string_view(&*begin, static_cast<std::size_t>(end - begin)) : std::string_view{};
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return fields;
}

bool all_of_char(std::string_view s, char c) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [c](char x) { return x == c; });
}

std::optional<int> to_int(std::string_view s) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// Splits "[-]Y-M-D" into its three components, keeping the sign on the year.
bool split_date(std::string_view text, bool& negative, std::string_view& y, std::string_view& m, std::string_view& d) {
  negative = !text.empty() && text.front() == '-';
  if (negative) text.remove_prefix(1);
  const std::size_t a = text.find('-');
  if (a == std::string_view::npos) return false;
  const std::size_t b = text.find('-', a + 1);
  if (b == std::string_view::npos || text.find('-', b + 1) != std::string_view::npos) return false;
  y = text.substr(0, a);
  m = text.substr(a + 1, b - a - 1);
  d = text.substr(b + 1);
  return true;
}

bool valid_calendar(int year, int month, int day) {
  using namespace std::chrono;
  return year_month_day{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                        std::chrono::day{static_cast<unsigned>(day)}}
      .ok();
}

std::int64_t days_since_epoch(const Date& d) {
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{d.year}, std::chrono::month{static_cast<unsigned>(*d.month)},
                           std::chrono::day{static_cast<unsigned>(*d.day)}};
  return sys_days{ymd}.time_since_epoch().count();
}

std::string fact_context(const RawFact& f) {
  return "(" + f.subject + ", " + f.predicate + ", " + f.object + ")";
}

template <typename Fn>
void for_each_date(std::span<const RawFact> facts, Fn&& fn) {
  for (const auto& fact : facts) {
    if (const auto* point = std::get_if<PointTime>(&fact.time)) {
      fn(point->date);
    } else {
      const auto& interval = std::get<IntervalTime>(fact.time);
      if (interval.start) fn(*interval.start);
      if (interval.end) fn(*interval.end);
    }
  }
}

}  // namespace

Date parse_full_date(std::string_view text) {
  bool negative = false;
  std::string_view y, m, d;
  if (!split_date(trim(text), negative, y, m, d) || m.size() != 2 || d.size() != 2) {
    throw DataError("malformed date '" + std::string(text) + "', expected YYYY-MM-DD");
  }
  const auto year = to_int(y);
  const auto month = to_int(m);
  const auto day = to_int(d);
  if (!year || !month || !day) throw DataError("malformed date '" + std::string(text) + "'");
  const int signed_year = negative ? -*year : *year;
  if (!valid_calendar(signed_year, *month, *day)) {
    throw DataError("invalid calendar date '" + std::string(text) + "'");
  }
  return Date{signed_year, *month, *day};
}

std::optional<Date> parse_partial_date(std::string_view text) {
  bool negative = false;
  std::string_view y, m, d;
  const std::string original(text);
  if (!split_date(trim(text), negative, y, m, d)) throw DataError("malformed date '" + original + "'");
  if (all_of_char(y, '#')) {
    if (negative) throw DataError("malformed date '" + original + "'");
    return std::nullopt;
  }
  const auto year = to_int(y);
  if (!year) throw DataError("malformed year in '" + original + "'");
  Date date{negative ? -*year : *year, std::nullopt, std::nullopt};
  if (!all_of_char(m, '#')) {
    const auto month = to_int(m);
    if (!month || *month < 1 || *month > 12) throw DataError("malformed month in '" + original + "'");
    date.month = *month;
  }
  if (!all_of_char(d, '#')) {
    const auto day = to_int(d);
    if (!day || !date.month || !valid_calendar(date.year, *date.month, *day)) {
      throw DataError("malformed day in '" + original + "'");
    }
    date.day = *day;
  }
  return date;
}

std::string format_date(const std::optional<Date>& date) {
  if (!date) return "####-##-##";
  char buf[32];
  const int year = date->year;
  std::snprintf(buf, sizeof buf, "%s%04d", year < 0 ? "-" : "", year < 0 ? -year : year);
  std::string out = buf;
  if (date->month) {
    std::snprintf(buf, sizeof buf, "-%02d", *date->month);
    out += buf;
  } else {
    out += "-##";
  }
  if (date->day) {
    std::snprintf(buf, sizeof buf, "-%02d", *date->day);
    out += buf;
  } else {
    out += "-##";
  }
  return out;
}

std::vector<RawFact> parse_fact_file(std::istream& in, FileFormat format) {
  const std::size_t expected = format == FileFormat::kPoint ? 4 : 5;
  std::vector<RawFact> facts;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::string_view view = line;
    while (!view.empty() && (view.back() == '\r' || view.back() == ' ')) view.remove_suffix(1);
    const auto fields = split_tabs(view);
    if (fields.size() != expected) {
      throw ParseError(line_no, "expected " + std::to_string(expected) + " tab-separated fields, found " +
                                    std::to_string(fields.size()));
    }
    RawFact fact;
    fact.subject = std::string(trim(fields[0]));
    fact.predicate = std::string(trim(fields[1]));
    fact.object = std::string(trim(fields[2]));
    if (fact.subject.empty() || fact.predicate.empty() || fact.object.empty()) {
      throw ParseError(line_no, "empty subject, predicate or object");
    }
    try {
      if (format == FileFormat::kPoint) {
        fact.time = PointTime{parse_full_date(fields[3])};
      } else {
        fact.time = IntervalTime{parse_partial_date(fields[3]), parse_partial_date(fields[4])};
      }
    } catch (const DataError& e) {
      throw ParseError(line_no, e.what());
    }
    facts.push_back(std::move(fact));
  }
  return facts;
}

std::vector<RawFact> parse_point_file(std::istream& in) { return parse_fact_file(in, FileFormat::kPoint); }

std::vector<RawFact> parse_interval_file(std::istream& in) { return parse_fact_file(in, FileFormat::kInterval); }

std::string format_fact_line(const RawFact& fact) {
  std::string out = fact.subject + '\t' + fact.predicate + '\t' + fact.object + '\t';
  if (const auto* point = std::get_if<PointTime>(&fact.time)) {
    out += format_date(point->date);
  } else {
    const auto& interval = std::get<IntervalTime>(fact.time);
    out += format_date(interval.start) + '\t' + format_date(interval.end);
  }
  out += '\n';
  return out;
}

std::int32_t Timeline::step_of(const Date& date) const {
  std::int64_t step = 0;
  if (granularity == Granularity::kDay) {
    if (!date.is_full()) throw DataError("day-granularity timeline needs full dates, got " + format_date(date));
    step = days_since_epoch(date) - days_since_epoch(origin);
  } else {
    const auto it = std::upper_bound(bin_bounds.begin(), bin_bounds.end(), date.year);
    step = static_cast<std::int64_t>(it - bin_bounds.begin()) - 1;
  }
  return static_cast<std::int32_t>(std::clamp<std::int64_t>(step, 0, n_steps - 1));
}

Timeline build_timeline(std::span<const RawFact> facts, Granularity granularity, std::optional<int> n_bins) {
  Timeline timeline;
  timeline.granularity = granularity;

  if (granularity == Granularity::kDay) {
    std::optional<std::int64_t> lo, hi;
    Date origin;
    for_each_date(facts, [&](const Date& d) {
      if (!d.is_full()) throw DataError("day granularity requires full dates, got " + format_date(d));
      const std::int64_t days = days_since_epoch(d);
      if (!lo || days < *lo) {
        lo = days;
        origin = d;
      }
      if (!hi || days > *hi) hi = days;
    });
    if (!lo) throw DataError("cannot build a timeline: no dated facts");
    timeline.origin = origin;
    timeline.n_steps = static_cast<std::int32_t>(*hi - *lo + 1);
    return timeline;
  }

  // Month and day are dropped; each dated endpoint counts once for its year.
  std::map<int, std::int64_t> histogram;
  for_each_date(facts, [&](const Date& d) { ++histogram[d.year]; });
  if (histogram.empty()) throw DataError("cannot build a timeline: no dated facts");
  if (!n_bins || *n_bins < 1) throw ConfigError("year-binned timeline requires n_bins >= 1");
  const int bins = *n_bins;
  const auto distinct = static_cast<std::int64_t>(histogram.size());
  if (bins > distinct) {
    throw DataError("n_bins = " + std::to_string(bins) + " exceeds the " + std::to_string(distinct) +
                    " distinct years in the data");
  }

  std::int64_t total = 0;
  for (const auto& [year, count] : histogram) total += count;

  // Greedy left-to-right: close bin k once the cumulative count reaches
  // (k + 1) * total / bins, or when each remaining year must open its own bin.
  timeline.bin_bounds.push_back(histogram.begin()->first);
  std::int64_t cumulative = 0;
  std::int64_t index = 0;
  for (auto it = histogram.begin(); it != histogram.end(); ++it, ++index) {
    cumulative += it->second;
    const auto bin = static_cast<std::int64_t>(timeline.bin_bounds.size()) - 1;
    if (bin == bins - 1) break;
    const std::int64_t years_left = distinct - 1 - index;
    const std::int64_t bins_left = bins - 1 - bin;
    const bool reached = cumulative * bins >= total * (bin + 1);
    if (reached || years_left == bins_left) {
      timeline.bin_bounds.push_back(std::next(it)->first);
    }
  }
  timeline.n_steps = bins;
  return timeline;
}

Vocabulary::Vocabulary(std::vector<std::string> entities, std::vector<std::string> relations, Timeline timeline,
                       bool reciprocal)
    : entities_(std::move(entities)),
      relations_(std::move(relations)),
      timeline_(std::move(timeline)),
      reciprocal_(reciprocal) {
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    if (!entity_index_.emplace(entities_[i], static_cast<std::int32_t>(i)).second) {
      throw DataError("duplicate entity label '" + entities_[i] + "'");
    }
  }
  for (std::size_t i = 0; i < relations_.size(); ++i) {
    if (!relation_index_.emplace(relations_[i], static_cast<std::int32_t>(i)).second) {
      throw DataError("duplicate relation label '" + relations_[i] + "'");
    }
  }
}

std::optional<std::int32_t> Vocabulary::find_entity(std::string_view label) const {
  const auto it = entity_index_.find(std::string(label));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::int32_t> Vocabulary::find_relation(std::string_view label) const {
  const auto it = relation_index_.find(std::string(label));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

std::int32_t Vocabulary::entity_id(std::string_view label) const {
  if (auto id = find_entity(label)) return *id;
  throw DataError("unknown entity '" + std::string(label) + "'");
}

std::int32_t Vocabulary::relation_id(std::string_view label) const {
  if (auto id = find_relation(label)) return *id;
  throw DataError("unknown relation '" + std::string(label) + "'");
}

const std::string& Vocabulary::entity_label(std::int32_t id) const { return entities_.at(static_cast<std::size_t>(id)); }

std::string Vocabulary::relation_label(std::int32_t id) const {
  if (id >= n_relations() && id < relation_space()) {
    return relations_.at(static_cast<std::size_t>(id - n_relations())) + "^-1";
  }
  return relations_.at(static_cast<std::size_t>(id));
}

Vocabulary build_vocabulary(std::span<const RawFact> train, std::span<const RawFact> valid,
                            std::span<const RawFact> test, Timeline timeline, bool reciprocal) {
  std::vector<std::string> entities;
  std::vector<std::string> relations;
  std::unordered_map<std::string, std::int32_t> seen_entities;
  std::unordered_map<std::string, std::int32_t> seen_relations;
  const auto add = [](std::vector<std::string>& labels, std::unordered_map<std::string, std::int32_t>& seen,
                      const std::string& label) {
    if (seen.emplace(label, static_cast<std::int32_t>(labels.size())).second) labels.push_back(label);
  };
  for (const auto split : {train, valid, test}) {
    for (const auto& fact : split) {
      add(entities, seen_entities, fact.subject);
      add(relations, seen_relations, fact.predicate);
      add(entities, seen_entities, fact.object);
    }
  }
  return Vocabulary(std::move(entities), std::move(relations), std::move(timeline), reciprocal);
}

IntervalFact discretize(const RawFact& fact, const Vocabulary& vocab) {
  IntervalFact out;
  out.s = vocab.entity_id(fact.subject);
  out.p = vocab.relation_id(fact.predicate);
  out.o = vocab.entity_id(fact.object);
  const Timeline& timeline = vocab.timeline();
  if (const auto* point = std::get_if<PointTime>(&fact.time)) {
    out.t_start = out.t_end = timeline.step_of(point->date);
    return out;
  }
  const auto& interval = std::get<IntervalTime>(fact.time);
  out.t_start = interval.start ? timeline.step_of(*interval.start) : 0;
  out.t_end = interval.end ? timeline.step_of(*interval.end) : timeline.n_steps - 1;
  if (out.t_start > out.t_end) {
    throw DataError("interval starts after it ends: " + fact_context(fact) + " [" + format_date(interval.start) +
                    ", " + format_date(interval.end) + "] -> steps [" + std::to_string(out.t_start) + ", " +
                    std::to_string(out.t_end) + "]");
  }
  return out;
}

std::vector<Quadruple> expand_interval(const IntervalFact& fact) {
  std::vector<Quadruple> out;
  if (fact.t_end < fact.t_start) return out;
  out.reserve(static_cast<std::size_t>(fact.length()));
  for (std::int32_t t = fact.t_start; t <= fact.t_end; ++t) out.push_back({fact.s, fact.p, fact.o, t});
  return out;
}

std::vector<Quadruple> expand_all(std::span<const IntervalFact> facts) {
  std::vector<Quadruple> out;
  for (const auto& f : facts) {
    for (std::int32_t t = f.t_start; t <= f.t_end; ++t) out.push_back({f.s, f.p, f.o, t});
  }
  return out;
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "valid") return Split::kValid;
  if (name == "test") return Split::kTest;
  throw ConfigError("unknown split '" + std::string(name) + "' (expected train, valid or test)");
}

const std::vector<IntervalFact>& DatasetBundle::split(Split which) const {
  switch (which) {
    case Split::kTrain: return train;
    case Split::kValid: return valid;
    case Split::kTest: return test;
  }
  return train;
}

void DatasetBundle::validate() const {
  const std::int32_t n_e = vocab.n_entities();
  const std::int32_t n_r = vocab.relation_space();
  const std::int32_t n_t = vocab.timeline().n_steps;
  for (const Split which : {Split::kTrain, Split::kValid, Split::kTest}) {
    for (const auto& f : split(which)) {
      const bool ok = f.s >= 0 && f.s < n_e && f.o >= 0 && f.o < n_e && f.p >= 0 && f.p < n_r && f.t_start >= 0 &&
                      f.t_start <= f.t_end && f.t_end < n_t;
      if (!ok) throw DataError("fact out of vocabulary range in split " + std::string(split_name(which)));
    }
  }
}

DatasetBundle make_bundle(const std::vector<RawFact>& train, const std::vector<RawFact>& valid,
                          const std::vector<RawFact>& test, const TimelineOptions& options, bool reciprocal) {
  std::vector<RawFact> all;
  all.reserve(train.size() + valid.size() + test.size());
  all.insert(all.end(), train.begin(), train.end());
  all.insert(all.end(), valid.begin(), valid.end());
  all.insert(all.end(), test.begin(), test.end());

  DatasetBundle bundle;
  bundle.vocab = build_vocabulary(train, valid, test, build_timeline(all, options.granularity, options.n_bins),
                                  reciprocal);
  const auto convert = [&](const std::vector<RawFact>& facts) {
    std::vector<IntervalFact> out;
    out.reserve(facts.size());
    for (const auto& f : facts) out.push_back(discretize(f, bundle.vocab));
    return out;
  };
  bundle.train = convert(train);
  bundle.valid = convert(valid);
  bundle.test = convert(test);
  bundle.provenance.requested_bins = options.n_bins.value_or(0);
  return bundle;
}

DatasetStats dataset_stats(const DatasetBundle& bundle) {
  DatasetStats stats;
  stats.entities = bundle.vocab.n_entities();
  stats.relations = bundle.vocab.n_relations();
  stats.time_steps = bundle.vocab.timeline().n_steps;
  stats.train = static_cast<std::int64_t>(bundle.train.size());
  stats.valid = static_cast<std::int64_t>(bundle.valid.size());
  stats.test = static_cast<std::int64_t>(bundle.test.size());
  return stats;
}

std::string format_stats_report(const DatasetStats& stats) {
  std::ostringstream out;
  out << "entities\t" << stats.entities << '\n'
      << "relations\t" << stats.relations << '\n'
      << "time_steps\t" << stats.time_steps << '\n'
      << "train\t" << stats.train << '\n'
      << "valid\t" << stats.valid << '\n'
      << "test\t" << stats.test << '\n';
  return out.str();
}

}  // namespace atise
