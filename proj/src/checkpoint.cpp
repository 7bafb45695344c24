#include "atise/checkpoint.hpp"

#include "atise/bundle_io.hpp"
#include "atise/error.hpp"

namespace atise {
namespace {

void write_table(BinaryWriter& w, const EmbeddingTable& table) {
  for (const Family f : kAllFamilies) w.f64s(table.family(f));
}

EmbeddingTable read_table(BinaryReader& r, std::int32_t rows, std::int32_t d) {
  EmbeddingTable table(rows, d);
  for (const Family f : kAllFamilies) {
    auto values = r.f64s();
    if (values.size() != table.family(f).size()) {
      throw CorruptionError("parameter table '" + std::string(family_name(f)) + "' has the wrong size");
    }
    table.family(f) = std::move(values);
  }
  return table;
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& c) {
  BinaryWriter w;
  w.str(c.vocab_digest);
  const ModelConfig& m = c.params.config;
  w.i32(m.d);
  w.u8(static_cast<std::uint8_t>(m.variant));
  w.f64(m.c_min);
  w.f64(m.c_max);
  w.i32(m.n_entities);
  w.i32(m.n_relations);
  w.i32(m.n_steps);
  w.u8(m.reciprocal ? 1 : 0);

  const TrainConfig& t = c.train_config;
  w.f64(t.lr);
  w.i32(t.batch_size);
  w.i32(t.eta);
  w.f64(t.gamma);
  w.f64(t.adv_temp);
  w.i32(t.max_epochs);
  w.i32(t.patience);
  w.i32(t.eval_every);
  w.u64(t.seed);
  w.u8(t.reciprocal ? 1 : 0);
  w.i32(t.threads);

  w.i64(c.epoch);
  w.f64(c.best_valid_mrr);
  w.i32(c.stale_validations);
  w.str(c.rng.serialize());

  write_table(w, c.params.entities);
  write_table(w, c.params.relations);

  w.f64(c.adam.beta1);
  w.f64(c.adam.beta2);
  w.f64(c.adam.epsilon);
  w.i64(c.adam.step);
  write_table(w, c.adam.m_entities);
  write_table(w, c.adam.v_entities);
  write_table(w, c.adam.m_relations);
  write_table(w, c.adam.v_relations);
  return encode_container(kCheckpointMagic, kCheckpointVersion, w.bytes());
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  const std::string payload = decode_container(bytes, kCheckpointMagic, kCheckpointVersion);
  BinaryReader r(payload);
  Checkpoint c;
  c.vocab_digest = r.str();
  ModelConfig& m = c.params.config;
  m.d = r.i32();
  const std::uint8_t variant = r.u8();
  if (variant > 3) throw CorruptionError("unknown model variant");
  m.variant = static_cast<Variant>(variant);
  m.c_min = r.f64();
  m.c_max = r.f64();
  m.n_entities = r.i32();
  m.n_relations = r.i32();
  m.n_steps = r.i32();
  m.reciprocal = r.u8() != 0;
  try {
    m.validate();
  } catch (const ConfigError& e) {
    throw CorruptionError(std::string("bad model config: ") + e.what());
  }

  TrainConfig& t = c.train_config;
  t.lr = r.f64();
  t.batch_size = r.i32();
  t.eta = r.i32();
  t.gamma = r.f64();
  t.adv_temp = r.f64();
  t.max_epochs = r.i32();
  t.patience = r.i32();
  t.eval_every = r.i32();
  t.seed = r.u64();
  t.reciprocal = r.u8() != 0;
  t.threads = r.i32();

  c.epoch = r.i64();
  c.best_valid_mrr = r.f64();
  c.stale_validations = r.i32();
  c.rng = RngStreams::deserialize(r.str());

  c.params.entities = read_table(r, m.n_entities, m.d);
  c.params.relations = read_table(r, m.n_relations, m.d);

  c.adam.beta1 = r.f64();
  c.adam.beta2 = r.f64();
  c.adam.epsilon = r.f64();
  c.adam.step = r.i64();
  c.adam.m_entities = read_table(r, m.n_entities, m.d);
  c.adam.v_entities = read_table(r, m.n_entities, m.d);
  c.adam.m_relations = read_table(r, m.n_relations, m.d);
  c.adam.v_relations = read_table(r, m.n_relations, m.d);
  r.expect_end();
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  write_file_atomic(path, encode_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

void check_compatible(const Checkpoint& checkpoint, const DatasetBundle& bundle, std::optional<std::int32_t> expected_d) {
  const ModelConfig& m = checkpoint.params.config;
  if (expected_d && *expected_d != m.d) {
    throw ShapeMismatchError("checkpoint has d = " + std::to_string(m.d) + ", expected " +
                             std::to_string(*expected_d));
  }
  if (checkpoint.vocab_digest != vocabulary_digest(bundle.vocab)) {
    throw ShapeMismatchError("checkpoint vocabulary digest does not match the bundle");
  }
  if (m.n_entities != bundle.vocab.n_entities() || m.n_relations != bundle.vocab.relation_space() ||
      m.n_steps != bundle.vocab.timeline().n_steps || m.reciprocal != bundle.vocab.reciprocal()) {
    throw ShapeMismatchError("checkpoint table sizes do not match the bundle");
  }
}

}  // namespace atise
