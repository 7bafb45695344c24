#pragma once

// Temporal fact corpora: parsing, time discretization, vocabularies and
// dataset bundles.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace atise {

// Calendar date. Month and day are optional because year-level corpora
// write them as '##'.
struct Date {
  int year = 0;
  std::optional<int> month;
  std::optional<int> day;

  bool is_full() const { return month.has_value() && day.has_value(); }
  friend bool operator==(const Date&, const Date&) = default;
};

struct PointTime {
  Date date;
  friend bool operator==(const PointTime&, const PointTime&) = default;
};

// A missing endpoint means "unknown" (open interval).
struct IntervalTime {
  std::optional<Date> start;
  std::optional<Date> end;
  friend bool operator==(const IntervalTime&, const IntervalTime&) = default;
};

using FactTime = std::variant<PointTime, IntervalTime>;

struct RawFact {
  std::string subject;
  std::string predicate;
  std::string object;
  FactTime time;
  friend bool operator==(const RawFact&, const RawFact&) = default;
};

enum class FileFormat { kPoint, kInterval };

// "YYYY-MM-DD", strict calendar validation.
Date parse_full_date(std::string_view text);
// "YYYY-MM-DD" with '#' placeholders; nullopt when the year is unknown.
std::optional<Date> parse_partial_date(std::string_view text);
std::string format_date(const std::optional<Date>& date);

std::vector<RawFact> parse_point_file(std::istream& in);
std::vector<RawFact> parse_interval_file(std::istream& in);
std::vector<RawFact> parse_fact_file(std::istream& in, FileFormat format);

// Inverse of the parsers: one line per fact, '\n' terminated.
std::string format_fact_line(const RawFact& fact);

enum class Granularity : std::uint8_t { kDay = 0, kYearBinned = 1 };

struct Timeline {
  Granularity granularity = Granularity::kDay;
  std::int32_t n_steps = 1;
  // First year of each bin (year-binned only), strictly increasing.
  std::vector<std::int32_t> bin_bounds;
  // Earliest observed date (day granularity only).
  Date origin;

  // Total over all dates; out-of-range dates clamp to the first/last step.
  std::int32_t step_of(const Date& date) const;
  friend bool operator==(const Timeline&, const Timeline&) = default;
};

Timeline build_timeline(std::span<const RawFact> facts, Granularity granularity,
                        std::optional<int> n_bins = std::nullopt);

struct Quadruple {
  std::int32_t s = 0;
  std::int32_t p = 0;
  std::int32_t o = 0;
  std::int32_t t = 0;
  friend bool operator==(const Quadruple&, const Quadruple&) = default;
};

struct IntervalFact {
  std::int32_t s = 0;
  std::int32_t p = 0;
  std::int32_t o = 0;
  std::int32_t t_start = 0;
  std::int32_t t_end = 0;

  std::int32_t length() const { return t_end - t_start + 1; }
  friend bool operator==(const IntervalFact&, const IntervalFact&) = default;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> entities, std::vector<std::string> relations, Timeline timeline,
             bool reciprocal);

  std::int32_t n_entities() const { return static_cast<std::int32_t>(entities_.size()); }
  // Relations observed in the data, without inverses.
  std::int32_t n_relations() const { return static_cast<std::int32_t>(relations_.size()); }
  // Size of the relation id space: doubled when reciprocal.
  std::int32_t relation_space() const { return reciprocal_ ? 2 * n_relations() : n_relations(); }
  bool reciprocal() const { return reciprocal_; }
  const Timeline& timeline() const { return timeline_; }

  std::optional<std::int32_t> find_entity(std::string_view label) const;
  std::optional<std::int32_t> find_relation(std::string_view label) const;
  std::int32_t entity_id(std::string_view label) const;
  std::int32_t relation_id(std::string_view label) const;
  const std::string& entity_label(std::int32_t id) const;
  // Inverse relations render as "<label>^-1".
  std::string relation_label(std::int32_t id) const;

  const std::vector<std::string>& entities() const { return entities_; }
  const std::vector<std::string>& relations() const { return relations_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.entities_ == b.entities_ && a.relations_ == b.relations_ && a.timeline_ == b.timeline_ &&
           a.reciprocal_ == b.reciprocal_;
  }

 private:
  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, std::int32_t> entity_index_;
  std::unordered_map<std::string, std::int32_t> relation_index_;
  Timeline timeline_;
  bool reciprocal_ = false;
};

// Ids are assigned in first-appearance order over train, then valid, then
// test; subject before object within a fact.
Vocabulary build_vocabulary(std::span<const RawFact> train, std::span<const RawFact> valid,
                            std::span<const RawFact> test, Timeline timeline, bool reciprocal);

IntervalFact discretize(const RawFact& fact, const Vocabulary& vocab);
std::vector<Quadruple> expand_interval(const IntervalFact& fact);
std::vector<Quadruple> expand_all(std::span<const IntervalFact> facts);

enum class Split { kTrain, kValid, kTest };
std::string_view split_name(Split split);
Split parse_split(std::string_view name);

struct SourceDigest {
  std::string role;  // "train", "valid", "test"
  std::string path;
  std::string sha256;
  friend bool operator==(const SourceDigest&, const SourceDigest&) = default;
};

struct Provenance {
  std::vector<SourceDigest> sources;
  FileFormat format = FileFormat::kPoint;
  std::int32_t requested_bins = 0;  // 0 for day granularity
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct DatasetBundle {
  Vocabulary vocab;
  std::vector<IntervalFact> train;
  std::vector<IntervalFact> valid;
  std::vector<IntervalFact> test;
  Provenance provenance;

  const std::vector<IntervalFact>& split(Split which) const;
  // Throws DataError if any split references an id outside the vocabulary
  // or a step outside the timeline.
  void validate() const;
  friend bool operator==(const DatasetBundle&, const DatasetBundle&) = default;
};

struct TimelineOptions {
  Granularity granularity = Granularity::kDay;
  std::optional<int> n_bins;
};

// Builds a bundle from already-parsed splits. The timeline covers all splits.
DatasetBundle make_bundle(const std::vector<RawFact>& train, const std::vector<RawFact>& valid,
                          const std::vector<RawFact>& test, const TimelineOptions& options, bool reciprocal);

struct DatasetStats {
  std::int64_t entities = 0;
  std::int64_t relations = 0;
  std::int64_t time_steps = 0;
  std::int64_t train = 0;
  std::int64_t valid = 0;
  std::int64_t test = 0;
};

DatasetStats dataset_stats(const DatasetBundle& bundle);
std::string format_stats_report(const DatasetStats& stats);

}  // namespace atise
