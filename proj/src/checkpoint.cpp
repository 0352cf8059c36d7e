// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace xgbl {

namespace {

class Writer {
 public:
  explicit Writer(Precision p) : precision_(p) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void i32(std::int32_t v) { le(static_cast<std::uint32_t>(v), 4); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void str(const std::string& s) {
    u64(s.size());
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void tensor(const Tensor& t) {
    u64(t.rows());
    u64(t.cols());
    for (double v : t.data()) {
      if (precision_ == Precision::F32) {
        le(std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
      } else {
        f64(v);
      }
    }
  }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  Precision precision_;
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::uint8_t* p, std::size_t n, Precision prec) : p_(p), n_(n), precision_(prec) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(le(4))); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::string str() {
    const std::uint64_t n = u64();
    need(n, "string");
    std::string s(reinterpret_cast<const char*>(p_ + pos_), n);
    pos_ += n;
    return s;
  }
  Tensor tensor() {
    const std::uint64_t rows = u64(), cols = u64();
    const std::uint64_t width = precision_ == Precision::F32 ? 4 : 8;
    if (rows != 0 && cols > (n_ - pos_) / width / rows) throw TruncatedError("checkpoint: tensor length exceeds file");
    Tensor t({rows, cols});
    for (std::size_t i = 0; i < t.numel(); ++i) {
      t[i] = precision_ == Precision::F32 ? static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(le(4))))
                                          : f64();
    }
    return t;
  }
  std::size_t remaining() const { return n_ - pos_; }
  void need(std::uint64_t k, const char* what) const {
    if (k > n_ - pos_) throw TruncatedError(std::string("checkpoint: truncated while reading ") + what);
  }

 private:
  std::uint64_t le(int n) {
    need(static_cast<std::uint64_t>(n), "field");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }
  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
  Precision precision_;
};

void write_adapters(Writer& w, const AdapterSet& s) {
  w.i32(s.booster_index());
  w.u8(s.merged() ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(s.size()));
  for (const auto& [id, p] : s.pairs()) {
    w.i32(id.layer);
    w.u8(static_cast<std::uint8_t>(id.role));
    w.u64(p.rank);
    w.f64(p.alpha);
    w.tensor(p.a);
    w.tensor(p.b);
  }
}

MatrixRole read_role(Reader& r) {
  const std::uint8_t v = r.u8();
  if (v > static_cast<std::uint8_t>(MatrixRole::Output)) throw CheckpointError("checkpoint: unknown matrix role");
  return static_cast<MatrixRole>(v);
}

AdapterSet read_adapters(Reader& r) {
  AdapterSet s(r.i32());
  const bool merged = r.u8() != 0;
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    LoraPair p;
    p.target.layer = r.i32();
    p.target.role = read_role(r);
    p.rank = r.u64();
    p.alpha = r.f64();
    p.a = r.tensor();
    p.b = r.tensor();
    s.add(std::move(p));
  }
  if (merged) s.mark_merged();
  return s;
}

void write_model(Writer& w, const ModelSpec& m) {
  w.u8(static_cast<std::uint8_t>(m.kind));
  w.u8(static_cast<std::uint8_t>(m.activation));
  w.u8(static_cast<std::uint8_t>(m.output));
  w.u64(m.num_layers);
  w.u32(static_cast<std::uint32_t>(m.dims.size()));
  for (std::size_t d : m.dims) w.u64(d);
  const TransformerShape& t = m.transformer;
  for (std::size_t v : {t.vocab, t.d_model, t.n_layers, t.n_heads, t.d_ff, t.max_seq}) w.u64(v);
  w.u8(t.tied_output ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(m.weights.size()));
  for (const auto& [id, t2] : m.weights) {
    w.i32(id.layer);
    w.u8(static_cast<std::uint8_t>(id.role));
    w.tensor(t2);
  }
}

ModelSpec read_model(Reader& r) {
  ModelSpec m;
  m.kind = static_cast<ModelKind>(r.u8());
  m.activation = static_cast<Activation>(r.u8());
  m.output = static_cast<OutputMap>(r.u8());
  m.num_layers = r.u64();
  const std::uint32_t nd = r.u32();
  r.need(std::uint64_t{nd} * 8, "dims");
  for (std::uint32_t i = 0; i < nd; ++i) m.dims.push_back(r.u64());
  TransformerShape& t = m.transformer;
  t.vocab = r.u64();
  t.d_model = r.u64();
  t.n_layers = r.u64();
  t.n_heads = r.u64();
  t.d_ff = r.u64();
  t.max_seq = r.u64();
  t.tied_output = r.u8() != 0;
  const std::uint32_t nw = r.u32();
  for (std::uint32_t i = 0; i < nw; ++i) {
    WeightId id;
    id.layer = r.i32();
    id.role = read_role(r);
    m.weights.emplace(id, r.tensor());
  }
  return m;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

}  // namespace

bool Checkpoint::operator==(const Checkpoint& o) const {
  auto same_sets = [](const std::optional<AdapterSet>& a, const std::optional<AdapterSet>& b) {
    if (a.has_value() != b.has_value()) return false;
    if (!a) return true;
    if (a->booster_index() != b->booster_index() || a->merged() != b->merged() || a->size() != b->size()) return false;
    for (const auto& [id, p] : a->pairs()) {
      const LoraPair* q = b->find(id);
      if (!q || q->rank != p.rank || q->alpha != p.alpha || !bitwise_equal(q->a, p.a) || !bitwise_equal(q->b, p.b))
        return false;
    }
    return true;
  };
  if (precision != o.precision || config_text != o.config_text || rng_states != o.rng_states) return false;
  if (model.kind != o.model.kind || model.num_layers != o.model.num_layers || model.dims != o.model.dims ||
      model.activation != o.model.activation || model.output != o.model.output ||
      model.weights.size() != o.model.weights.size())
    return false;
  for (const auto& [id, w] : model.weights) {
    auto it = o.model.weights.find(id);
    if (it == o.model.weights.end() || !bitwise_equal(w, it->second)) return false;
  }
  return state.global_step == o.state.global_step && state.booster == o.state.booster &&
         state.step_in_booster == o.state.step_in_booster && state.batch_rng_state == o.state.batch_rng_state &&
         same_bits(state.losses, o.state.losses) && same_bits(state.grad_norms, o.state.grad_norms) &&
         same_bits(state.grad_norms_a, o.state.grad_norms_a) && same_bits(state.grad_norms_b, o.state.grad_norms_b) &&
         same_sets(state.live, o.state.live) && same_sets(state.origin, o.state.origin);
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
  Writer body(ck.precision);
  body.str(ck.config_text);
  write_model(body, ck.model);
  for (const auto* s : {&ck.state.live, &ck.state.origin}) {
    body.u8(s->has_value() ? 1 : 0);
    if (*s) write_adapters(body, **s);
  }
  body.u64(ck.state.global_step);
  body.u64(ck.state.booster);
  body.u64(ck.state.step_in_booster);
  body.u64(ck.state.batch_rng_state);
  for (const auto* v : {&ck.state.losses, &ck.state.grad_norms, &ck.state.grad_norms_a, &ck.state.grad_norms_b}) {
    body.u64(v->size());
    for (double x : *v) body.f64(x);
  }
  body.u32(static_cast<std::uint32_t>(ck.rng_states.size()));
  for (std::uint64_t s : ck.rng_states) body.u64(s);

  Writer head(ck.precision);
  for (char c : {'X', 'G', 'B', 'L'}) head.u8(static_cast<std::uint8_t>(c));
  head.u16(kCheckpointVersion);
  head.u8(ck.precision == Precision::F32 ? 1 : 0);
  head.u8(0);
  head.u64(body.bytes().size());
  std::vector<std::uint8_t> out = std::move(head.bytes());
  out.insert(out.end(), body.bytes().begin(), body.bytes().end());
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "XGBL", 4) != 0) throw BadMagicError("checkpoint: bad magic");
  Reader head(bytes.data() + 4, bytes.size() - 4, Precision::F64);
  const std::uint16_t version = head.u16();
  if (version != kCheckpointVersion) {
    throw VersionMismatchError("checkpoint: version " + std::to_string(version) + ", expected " +
                               std::to_string(kCheckpointVersion));
  }
  const std::uint8_t prec = head.u8();
  if (prec > 1) throw CheckpointError("checkpoint: unknown precision byte");
  head.u8();
  const std::uint64_t body_len = head.u64();
  const std::size_t header = 4 + 2 + 1 + 1 + 8;
  if (body_len != bytes.size() - header) {
    throw TruncatedError("checkpoint: body length " + std::to_string(body_len) + " does not match file (" +
                         std::to_string(bytes.size() - header) + " bytes)");
  }
  Checkpoint ck;
  ck.precision = prec == 1 ? Precision::F32 : Precision::F64;
  Reader r(bytes.data() + header, body_len, ck.precision);
  ck.config_text = r.str();
  ck.model = read_model(r);
  if (r.u8()) ck.state.live = read_adapters(r);
  if (r.u8()) ck.state.origin = read_adapters(r);
  ck.state.global_step = r.u64();
  ck.state.booster = r.u64();
  ck.state.step_in_booster = r.u64();
  ck.state.batch_rng_state = r.u64();
  for (auto* v : {&ck.state.losses, &ck.state.grad_norms, &ck.state.grad_norms_a, &ck.state.grad_norms_b}) {
    const std::uint64_t n = r.u64();
    if (n > r.remaining() / 8) throw TruncatedError("checkpoint: truncated while reading step records");
    for (std::uint64_t i = 0; i < n; ++i) v->push_back(r.f64());
  }
  const std::uint32_t n = r.u32();
  if (n > r.remaining() / 8) throw TruncatedError("checkpoint: truncated while reading rng states");
  for (std::uint32_t i = 0; i < n; ++i) ck.rng_states.push_back(r.u64());
  if (r.remaining() != 0) throw CheckpointError("checkpoint: trailing bytes after body");
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  const auto bytes = encode_checkpoint(ck);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("checkpoint: cannot write '" + tmp + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("checkpoint: write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("checkpoint: cannot rename to '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("checkpoint: cannot read '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace xgbl
