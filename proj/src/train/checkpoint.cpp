#include "bwe/train/checkpoint.hpp"

#include <charconv>
#include <cmath>
#include <map>

#include "bwe/data/io.hpp"
#include "bwe/error.hpp"

namespace bwe {

namespace {

constexpr char kMagic[4] = {'B', 'W', 'E', 'H'};

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

double parse_double(const std::string& key, const std::string& v) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw FormatError("checkpoint: bad value for " + key);
  return out;
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw FormatError("checkpoint: bad value for " + key);
  return out;
}

void write_tensor(ByteWriter& w, const std::string& name, const nn::Tensor<float>& t) {
  w.u32(static_cast<std::uint32_t>(name.size()));
  w.str(name);
  w.u8(static_cast<std::uint8_t>(t.rank()));
  for (auto d : t.dims()) w.u32(static_cast<std::uint32_t>(d));
  for (float v : t.data()) w.f32(v);
}

}  // namespace

template <typename T>
std::unique_ptr<WaveformModel<T>> Checkpoint::make_model() const {
  auto model = bwe::make_model<T>(config.model, config.train.seed);
  auto& dst = model->parameters();
  if (dst.size() != params.size())
    throw FormatError("checkpoint parameter count does not match its model config");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst.name(i) != params.name(i) || dst[i].dims() != params[i].dims())
      throw FormatError("checkpoint tensor '" + params.name(i) + "' does not match the model");
    dst[i] = params[i].template cast<T>();
  }
  return model;
}

template std::unique_ptr<WaveformModel<float>> Checkpoint::make_model<float>() const;
template std::unique_ptr<WaveformModel<double>> Checkpoint::make_model<double>() const;

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  TextConfig text = ckpt.config.to_text();
  text.set("meta.epoch", std::to_string(ckpt.epoch));
  text.set("meta.best_valid_ce", fmt(ckpt.best_valid_ce));
  if (ckpt.adam) {
    const auto& h = ckpt.adam->hyper;
    text.set("meta.adam_step", std::to_string(ckpt.adam->step));
    text.set("meta.adam_lr", fmt(h.lr));
    text.set("meta.adam_beta1", fmt(h.beta1));
    text.set("meta.adam_beta2", fmt(h.beta2));
    text.set("meta.adam_epsilon", fmt(h.epsilon));
  }
  const std::string blob = text.serialize();

  ByteWriter w;
  w.raw({reinterpret_cast<const std::uint8_t*>(kMagic), 4});
  w.u32(Checkpoint::kVersion);
  w.u32(static_cast<std::uint32_t>(blob.size()));
  w.str(blob);
  const std::size_t n = ckpt.params.size() * (ckpt.adam ? 3 : 1);
  w.u32(static_cast<std::uint32_t>(n));
  for (const auto& [name, t] : ckpt.params) write_tensor(w, name, t);
  if (ckpt.adam) {
    for (std::size_t i = 0; i < ckpt.params.size(); ++i)
      write_tensor(w, "adam.m." + ckpt.params.name(i), ckpt.adam->first_moment[i]);
    for (std::size_t i = 0; i < ckpt.params.size(); ++i)
      write_tensor(w, "adam.v." + ckpt.params.name(i), ckpt.adam->second_moment[i]);
  }
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& what) {
  ByteReader r(bytes, what);
  const auto magic = r.raw(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic))
    throw FormatError(what + ": not a checkpoint (bad magic)");
  const auto version = r.u32();
  if (version != Checkpoint::kVersion)
    throw FormatError(what + ": unsupported checkpoint version " + std::to_string(version));
  const std::string blob = r.str(r.u32());

  TextConfig text;
  try {
    text = TextConfig::parse(blob, what);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint config: ") + e.what());
  }
  std::map<std::string, std::string> meta;
  for (const auto& [k, v] : text.entries())
    if (k.rfind("meta.", 0) == 0) meta[k] = v;
  for (const auto& [k, v] : meta) text.erase(k);

  Checkpoint ck;
  try {
    ck.config = RunConfig::from_text(text);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint config: ") + e.what());
  }
  auto meta_get = [&](const std::string& k) -> const std::string& {
    const auto it = meta.find(k);
    if (it == meta.end()) throw FormatError(what + ": missing " + k);
    return it->second;
  };
  ck.epoch = static_cast<int>(parse_int("meta.epoch", meta_get("meta.epoch")));
  ck.best_valid_ce = parse_double("meta.best_valid_ce", meta_get("meta.best_valid_ce"));
  const bool has_adam = meta.count("meta.adam_step") > 0;

  // The model built from the config is the schema for the tensor section.
  const auto reference = make_model<float>(ck.config.model, 0)->parameters().zeros_like();
  ck.params = reference.zeros_like();
  nn::ParameterSet<float> m = reference.zeros_like(), v = reference.zeros_like();
  std::vector<char> seen_p(reference.size(), 0), seen_m(reference.size(), 0),
      seen_v(reference.size(), 0);

  const auto count = r.u32();
  for (std::uint32_t n = 0; n < count; ++n) {
    const std::string name = r.str(r.u32());
    nn::ParameterSet<float>* dst = &ck.params;
    std::vector<char>* seen = &seen_p;
    std::string base = name;
    if (name.rfind("adam.m.", 0) == 0) {
      dst = &m, seen = &seen_m, base = name.substr(7);
    } else if (name.rfind("adam.v.", 0) == 0) {
      dst = &v, seen = &seen_v, base = name.substr(7);
    }
    const std::size_t idx = reference.find(base);
    if (idx == reference.size() || (dst != &ck.params && !has_adam))
      throw FormatError(what + ": unknown tensor '" + name + "'");
    if ((*seen)[idx]) throw FormatError(what + ": duplicate tensor '" + name + "'");
    (*seen)[idx] = 1;
    const auto rank = r.u8();
    std::vector<std::int64_t> dims(rank);
    for (auto& d : dims) d = r.u32();
    if (dims != reference[idx].dims())
      throw FormatError(what + ": tensor '" + name + "' has shape " + nn::shape_string(dims) +
                        ", expected " + nn::shape_string(reference[idx].dims()));
    auto& t = (*dst)[idx];
    for (auto& x : t.data()) x = r.f32();
  }
  if (r.remaining() != 0) throw FormatError(what + ": trailing bytes after tensors");
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (!seen_p[i]) throw FormatError(what + ": missing tensor '" + reference.name(i) + "'");
    if (has_adam && (!seen_m[i] || !seen_v[i]))
      throw FormatError(what + ": missing optimizer state for '" + reference.name(i) + "'");
  }
  if (has_adam) {
    nn::AdamHyper h;
    h.lr = parse_double("meta.adam_lr", meta_get("meta.adam_lr"));
    h.beta1 = parse_double("meta.adam_beta1", meta_get("meta.adam_beta1"));
    h.beta2 = parse_double("meta.adam_beta2", meta_get("meta.adam_beta2"));
    h.epsilon = parse_double("meta.adam_epsilon", meta_get("meta.adam_epsilon"));
    ck.adam = nn::AdamState<float>{h, parse_int("meta.adam_step", meta_get("meta.adam_step")),
                                   std::move(m), std::move(v)};
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("checkpoint not found: " + path.string());
  return decode_checkpoint(read_file(path), path.string());
}

}  // namespace bwe
