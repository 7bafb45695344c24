#include "atise/bundle_io.hpp"

#include "atise/error.hpp"

namespace atise {
namespace {

void write_timeline(BinaryWriter& w, const Timeline& t) {
  w.u8(static_cast<std::uint8_t>(t.granularity));
  w.i32(t.n_steps);
  w.i32s(t.bin_bounds);
  w.i32(t.origin.year);
  w.i32(t.origin.month.value_or(0));
  w.i32(t.origin.day.value_or(0));
}

Timeline read_timeline(BinaryReader& r) {
  Timeline t;
  const std::uint8_t g = r.u8();
  if (g > 1) throw CorruptionError("unknown timeline granularity");
  t.granularity = static_cast<Granularity>(g);
  t.n_steps = r.i32();
  if (t.n_steps < 1) throw CorruptionError("timeline has no steps");
  t.bin_bounds = r.i32s();
  t.origin.year = r.i32();
  if (const std::int32_t m = r.i32(); m != 0) t.origin.month = m;
  if (const std::int32_t d = r.i32(); d != 0) t.origin.day = d;
  return t;
}

void write_vocab_tables(BinaryWriter& w, const Vocabulary& v) {
  w.u8(v.reciprocal() ? 1 : 0);
  w.u64(v.entities().size());
  for (const auto& label : v.entities()) w.str(label);
  w.u64(v.relations().size());
  for (const auto& label : v.relations()) w.str(label);
}

std::vector<std::string> read_labels(BinaryReader& r) {
  const std::uint64_t n = r.u64();
  std::vector<std::string> labels;
  for (std::uint64_t i = 0; i < n; ++i) labels.push_back(r.str());
  return labels;
}

void write_split(BinaryWriter& w, const std::vector<IntervalFact>& facts) {
  std::vector<std::int32_t> flat;
  flat.reserve(facts.size() * 5);
  for (const auto& f : facts) flat.insert(flat.end(), {f.s, f.p, f.o, f.t_start, f.t_end});
  w.i32s(flat);
}

std::vector<IntervalFact> read_split(BinaryReader& r) {
  const auto flat = r.i32s();
  if (flat.size() % 5 != 0) throw CorruptionError("split table is not a multiple of 5 integers");
  std::vector<IntervalFact> facts(flat.size() / 5);
  for (std::size_t i = 0; i < facts.size(); ++i) {
    const auto* x = &flat[5 * i];
    facts[i] = {x[0], x[1], x[2], x[3], x[4]};
  }
  return facts;
}

}  // namespace

std::string encode_bundle(const DatasetBundle& bundle) {
  BinaryWriter w;
  w.u8(static_cast<std::uint8_t>(bundle.provenance.format));
  w.i32(bundle.provenance.requested_bins);
  w.u64(bundle.provenance.sources.size());
  for (const auto& s : bundle.provenance.sources) {
    w.str(s.role);
    w.str(s.path);
    w.str(s.sha256);
  }
  write_timeline(w, bundle.vocab.timeline());
  write_vocab_tables(w, bundle.vocab);
  write_split(w, bundle.train);
  write_split(w, bundle.valid);
  write_split(w, bundle.test);
  return encode_container(kBundleMagic, kBundleVersion, w.bytes());
}

DatasetBundle decode_bundle(std::string_view bytes) {
  const std::string payload = decode_container(bytes, kBundleMagic, kBundleVersion);
  BinaryReader r(payload);
  DatasetBundle bundle;
  const std::uint8_t format = r.u8();
  if (format > 1) throw CorruptionError("unknown source format");
  bundle.provenance.format = static_cast<FileFormat>(format);
  bundle.provenance.requested_bins = r.i32();
  const std::uint64_t n_sources = r.u64();
  for (std::uint64_t i = 0; i < n_sources; ++i) {
    SourceDigest s;
    s.role = r.str();
    s.path = r.str();
    s.sha256 = r.str();
    bundle.provenance.sources.push_back(std::move(s));
  }
  Timeline timeline = read_timeline(r);
  const bool reciprocal = r.u8() != 0;
  auto entities = read_labels(r);
  auto relations = read_labels(r);
  try {
    bundle.vocab = Vocabulary(std::move(entities), std::move(relations), std::move(timeline), reciprocal);
  } catch (const DataError& e) {
    throw CorruptionError(std::string("bad vocabulary: ") + e.what());
  }
  bundle.train = read_split(r);
  bundle.valid = read_split(r);
  bundle.test = read_split(r);
  r.expect_end();
  try {
    bundle.validate();
  } catch (const DataError& e) {
    throw CorruptionError(e.what());
  }
  return bundle;
}

void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& path) {
  write_file_atomic(path, encode_bundle(bundle));
}

DatasetBundle load_bundle(const std::filesystem::path& path) { return decode_bundle(read_file(path)); }

std::string vocabulary_digest(const Vocabulary& vocab) {
  BinaryWriter w;
  write_timeline(w, vocab.timeline());
  write_vocab_tables(w, vocab);
  return sha256_hex(w.bytes());
}

}  // namespace atise
