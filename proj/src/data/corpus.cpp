#include "bwe/data/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "bwe/data/io.hpp"
#include "bwe/dsp/fir.hpp"
#include "bwe/dsp/mulaw.hpp"
#include "bwe/error.hpp"

namespace bwe {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace

Manifest parse_manifest(const std::string& text, const fs::path& base_dir,
                        const std::string& split) {
  Manifest m;
  m.split = split;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_tabs(line);
    if (f.size() < 2 || f.size() > 3 || f[0].empty() || f[1].empty())
      throw DataError("manifest line " + std::to_string(lineno) +
                      ": expected id<TAB>wav[<TAB>features]");
    if (!seen.insert(f[0]).second)
      throw DataError("manifest line " + std::to_string(lineno) + ": duplicate id '" + f[0] + "'");
    ManifestEntry e{f[0], resolve(base_dir, f[1]), std::nullopt};
    if (f.size() == 3 && !f[2].empty()) e.features = resolve(base_dir, f[2]);
    m.entries.push_back(std::move(e));
  }
  return m;
}

Manifest load_manifest(const fs::path& path, const std::string& split) {
  if (!fs::exists(path)) throw DataError("manifest not found: " + path.string());
  const auto bytes = read_file(path);
  Manifest m = parse_manifest(std::string(bytes.begin(), bytes.end()), path.parent_path(), split);
  for (const auto& e : m.entries) {
    if (!fs::exists(e.wav)) throw DataError("utterance " + e.id + ": missing " + e.wav.string());
    if (e.features && !fs::exists(*e.features))
      throw DataError("utterance " + e.id + ": missing " + e.features->string());
  }
  return m;
}

UtterancePair build_pair(const Waveform& wideband, Strategy strategy, double hf_gain,
                         ConditionSource source, const ConditionTrack* external, std::string id) {
  if (wideband.sample_rate() != kWidebandRate)
    throw DataError("build_pair: wideband input must be 16 kHz, got " +
                    std::to_string(wideband.sample_rate()));
  if (wideband.empty()) throw DataError("build_pair: empty waveform");
  UtterancePair p;
  p.id = std::move(id);
  p.narrowband = downsample2(wideband);
  auto up = upsample2(p.narrowband).vec();
  up.resize(wideband.size());
  p.input = mulaw_encode(Waveform(std::move(up), kWidebandRate));
  p.target = strategy == Strategy::Wideband ? mulaw_encode(wideband)
                                            : mulaw_encode(make_hf_target(wideband, hf_gain));
  switch (source) {
    case ConditionSource::None: break;
    case ConditionSource::Mfcc:
      p.conditions = mfcc(p.narrowband, MfccConfig::narrowband());
      if (p.conditions->empty()) throw DataError("utterance too short for MFCC conditions");
      break;
    case ConditionSource::External:
      if (!external || external->empty())
        throw DataError("external condition features required but not supplied");
      p.conditions = *external;
      break;
  }
  return p;
}

std::vector<UtterancePair> load_corpus(const Manifest& manifest, const ModelConfig& cfg) {
  if (manifest.entries.empty()) throw DataError("empty manifest");
  std::vector<UtterancePair> pairs;
  pairs.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    const Waveform wb = load_wav(e.wav);
    std::optional<ConditionTrack> feats;
    if (cfg.condition == ConditionSource::External) {
      if (!e.features) throw DataError("utterance " + e.id + ": model needs a feature file");
      feats = load_features(*e.features);
    }
    pairs.push_back(build_pair(wb, cfg.strategy, cfg.hf_gain, cfg.condition,
                               feats ? &*feats : nullptr, e.id));
  }
  return pairs;
}

std::int64_t PaddedBatch::mask_count() const {
  return std::accumulate(mask.begin(), mask.end(), std::int64_t{0});
}

void PaddedBatch::time_major(std::int64_t begin, std::int64_t end,
                             std::vector<std::uint8_t>& targets_out,
                             std::vector<std::uint8_t>& mask_out) const {
  const auto n = static_cast<std::size_t>((end - begin) * batch);
  targets_out.assign(n, kZeroLevel);
  mask_out.assign(n, 0);
  for (std::int64_t t = begin; t < end; ++t) {
    if (t >= length) continue;
    for (std::int64_t b = 0; b < batch; ++b) {
      const auto src = static_cast<std::size_t>(b * length + t);
      const auto dst = static_cast<std::size_t>((t - begin) * batch + b);
      targets_out[dst] = targets[src];
      mask_out[dst] = mask[src];
    }
  }
}

PaddedBatch make_padded_batch(const std::vector<UtterancePair>& pairs,
                              const std::vector<std::size_t>& indices, const ModelConfig& cfg) {
  if (indices.empty()) throw DataError("empty batch");
  PaddedBatch pb;
  pb.batch = static_cast<std::int64_t>(indices.size());
  std::int64_t longest = 0;
  for (auto i : indices) {
    const auto& p = pairs.at(i);
    if (p.input.size() != p.target.size())
      throw DataError("utterance " + p.id + ": input and target lengths differ");
    longest = std::max<std::int64_t>(longest, static_cast<std::int64_t>(p.input.size()));
  }
  const std::int64_t step = cfg.step_samples();
  pb.length = (longest + step - 1) / step * step;
  const auto cells = static_cast<std::size_t>(pb.batch * pb.length);
  pb.inputs.assign(cells, kZeroLevel);
  pb.targets.assign(cells, kZeroLevel);
  pb.mask.assign(cells, 0);
  for (std::int64_t b = 0; b < pb.batch; ++b) {
    const auto& p = pairs[indices[static_cast<std::size_t>(b)]];
    const auto off = static_cast<std::size_t>(b * pb.length);
    std::copy(p.input.vec().begin(), p.input.vec().end(), pb.inputs.begin() + off);
    std::copy(p.target.vec().begin(), p.target.vec().end(), pb.targets.begin() + off);
    std::fill_n(pb.mask.begin() + off, p.input.size(), 1);
    pb.valid_len.push_back(static_cast<std::int64_t>(p.input.size()));
    pb.ids.push_back(p.id);
    if (cfg.conditional()) {
      if (!p.conditions) throw DataError("utterance " + p.id + ": missing conditions");
      pb.conditions.push_back(*p.conditions);
    }
  }
  return pb;
}

SequenceBatch to_sequence_batch(const PaddedBatch& pb, const ModelConfig& cfg) {
  std::vector<std::span<const std::uint8_t>> rows;
  for (std::int64_t b = 0; b < pb.batch; ++b)
    rows.emplace_back(pb.inputs.data() + b * pb.length,
                      static_cast<std::size_t>(pb.valid_len[static_cast<std::size_t>(b)]));
  return make_sequence_batch(rows, cfg, pb.conditions, pb.length);
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size,
                                                    std::uint64_t seed, bool shuffle) {
  if (batch_size == 0) throw ParameterError("batch size must be >= 1");
  if (n == 0) throw DataError("no utterances to batch");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    // Fisher-Yates on mt19937_64 directly; std::shuffle's output is
    // implementation-defined.
    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; i += batch_size)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + batch_size)));
  return out;
}

BatchStream::BatchStream(const std::vector<UtterancePair>& pairs, std::size_t batch_size,
                         std::uint64_t seed, const ModelConfig& cfg, bool shuffle)
    : pairs_(&pairs), cfg_(cfg), order_(batch_indices(pairs.size(), batch_size, seed, shuffle)) {}

std::optional<PaddedBatch> BatchStream::next() {
  if (pos_ >= order_.size()) return std::nullopt;
  return make_padded_batch(*pairs_, order_[pos_++], cfg_);
}

std::vector<TbpttChunk> tbptt_chunks(std::int64_t length, std::int64_t chunk_len,
                                     const ModelConfig& cfg) {
  if (chunk_len <= 0) throw ParameterError("chunk length must be positive");
  const std::int64_t step = cfg.step_samples();
  const std::int64_t chunk = (chunk_len + step - 1) / step * step;
  std::vector<TbpttChunk> out;
  for (std::int64_t b = 0; b < length; b += chunk)
    out.push_back({b, std::min(length, b + chunk), b == 0});
  return out;
}

}  // namespace bwe
