#include <cmath>
#include <random>

#include "bwe/dsp/mulaw.hpp"
#include "bwe/error.hpp"
#include "bwe/models/model.hpp"
#include "bwe/nn/optim.hpp"
#include "doctest.h"
#include "grad_problems.hpp"

using namespace bwe;
using nn::Mat;
using testing::ModelObjective;
using testing::random_levels;

namespace {

ConditionTrack random_track(std::size_t frames, std::size_t dim, std::uint32_t shift,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  ConditionTrack t{dim, shift, std::vector<float>(frames * dim)};
  for (auto& v : t.frames) v = u(rng);
  return t;
}

ModelConfig tiny_hrnn(int hidden = 8, int embed = 4) {
  return ModelConfig::full_hrnn(hidden, embed);
}

std::int64_t receptive_bound(std::int64_t t0, const ModelConfig& cfg) {
  // Last input index (0-based) that output t0 may read.
  const std::int64_t lk = cfg.top().frame_size;
  return (t0 / lk + cfg.top().concat) * lk - 1;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("full-size defaults") {
    const auto cfg = ModelConfig::full_hrnn();
    REQUIRE(cfg.tier_count() == 3);
    CHECK(cfg.tiers[0].frame_size == 1);
    CHECK(cfg.tiers[0].concat == 4);
    CHECK(cfg.tiers[1].frame_size == 4);
    CHECK(cfg.tiers[1].concat == 2);
    CHECK(cfg.tiers[2].frame_size == 16);
    CHECK(cfg.tiers[2].concat == 2);
    CHECK(cfg.hidden == 1024);
    CHECK(cfg.embed_dim == 256);
    CHECK(cfg.step_samples() == 16);
    CHECK_NOTHROW(cfg.validate());
  }

  TEST_CASE("validation") {
    auto bad = ModelConfig::hrnn({16, 6, 1}, {2, 2, 4}, 8, 4);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ModelConfig::hrnn({4, 16, 1}, {2, 2, 4}, 8, 4);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ModelConfig::hrnn({16, 4, 2}, {2, 2, 4}, 8, 4);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ModelConfig::hrnn({1}, {4}, 8, 4);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ModelConfig::full_chrnn(39, 25.0, 8, 4);
    bad.tiers.back().concat = 2;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ModelConfig::full_hrnn(8, 4);
    bad.tiers[1].kind = TierKind::Conditional;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }

  TEST_CASE("maximal latency") {
    CHECK(max_latency_ms(ModelConfig::full_hrnn(), 16000) == 1.9375);
    CHECK(max_latency_ms(ModelConfig::full_srnn(), 16000) == 0.0);
    CHECK(max_latency_ms(ModelConfig::full_chrnn(39, 25.0), 16000) == 25.0);
  }
}

TEST_SUITE("padding and framing") {
  TEST_CASE("pad for the full-size config") {
    const auto p = pad_for_model(std::vector<std::uint8_t>(100, 5), ModelConfig::full_hrnn());
    CHECK(p.model_len == 112);
    CHECK(p.levels.size() == 128);
    CHECK(p.valid_len == 100);
    std::size_t ones = 0;
    for (std::size_t i = 0; i < p.mask.size(); ++i) {
      ones += p.mask[i];
      CHECK(p.mask[i] == (i < 100));
      if (i >= 100) CHECK(p.levels[i] == 128);
    }
    CHECK(ones == 100);
  }

  TEST_CASE("no padding when divisible and nothing is concatenated") {
    const auto cfg = ModelConfig::hrnn({4, 1}, {1, 1}, 8, 4);
    const auto p = pad_for_model(std::vector<std::uint8_t>(16, 9), cfg);
    CHECK(p.levels.size() == 16);
    CHECK(p.model_len == 16);
    CHECK_THROWS_AS(pad_for_model(std::vector<std::uint8_t>{}, cfg), DataError);
  }

  TEST_CASE("frame inputs of an intermediate tier") {
    std::vector<std::uint8_t> lv(16);
    for (std::size_t i = 0; i < 16; ++i) lv[i] = static_cast<std::uint8_t>(10 * i);
    PaddedInput x{lv, std::vector<std::uint8_t>(16, 1), 16, 16};
    x.levels.resize(20, 128);
    const TierSpec tier{4, 2, TierKind::Intermediate, 8, 1};
    const auto f = frame_tier_inputs<double>(x, tier);
    REQUIRE(f.rows() == 4);
    REQUIRE(f.cols() == 8);
    for (int i = 0; i < 8; ++i) CHECK(f(0, i) == mulaw_decode_level(lv[static_cast<std::size_t>(i)]));
    for (int i = 0; i < 8; ++i) CHECK(f(1, i) == mulaw_decode_level(x.levels[static_cast<std::size_t>(4 + i)]));
    x.levels.resize(16);
    CHECK_THROWS_AS(frame_tier_inputs<double>(x, tier), ShapeError);
  }

  TEST_CASE("sample tier concatenation") {
    Mat<double> emb = Mat<double>::Random(10, 256);
    const auto f = concat_sample_embeddings(emb, 4, 7);
    CHECK(f.rows() == 7);
    CHECK(f.cols() == 1024);
    CHECK(f.row(2).segment(3 * 256, 256) == emb.row(5));
    CHECK_THROWS_AS(concat_sample_embeddings(emb, 4, 8), ShapeError);
  }
}

TEST_SUITE("fan-out") {
  TEST_CASE("ordering and count") {
    const int r = 4, d = 2, h = 3;
    nn::Tensor<double> w({r * d, h});
    nn::Rng rng(1);
    nn::init_uniform(w, 1.0, rng);
    Mat<double> hs = Mat<double>::Random(3, h);
    Mat<double> out;
    conditioning_fanout(hs, w, r, 1, out);
    REQUIRE(out.rows() == 12);
    for (int t = 0; t < 3; ++t)
      for (int j = 0; j < r; ++j) {
        const Mat<double> wj = w.matrix().middleRows(j * d, d);
        CHECK((out.row(t * r + j) - hs.row(t) * wj.transpose()).norm() < 1e-14);
      }
  }

  TEST_CASE("ratio one is a pointwise projection") {
    nn::Tensor<double> w({2, 3});
    w.fill(0.5);
    Mat<double> hs = Mat<double>::Random(5, 3), out;
    conditioning_fanout(hs, w, 1, 1, out);
    CHECK(out.rows() == 5);
  }

  TEST_CASE("constant input repeats with period r") {
    nn::Tensor<double> w({6, 2});
    nn::Rng rng(2);
    nn::init_uniform(w, 1.0, rng);
    Mat<double> hs(4, 2);
    hs.rowwise() = Eigen::RowVector2d(0.3, -0.8);
    Mat<double> out;
    conditioning_fanout(hs, w, 3, 1, out);
    for (int i = 3; i < out.rows(); ++i) CHECK(out.row(i) == out.row(i - 3));
    CHECK(out.row(0) != out.row(1));
  }

  TEST_CASE("bad ratio") {
    nn::Tensor<double> w({5, 2});
    Mat<double> hs = Mat<double>::Zero(2, 2), out;
    CHECK_THROWS_AS(conditioning_fanout(hs, w, 2, 1, out), ShapeError);
  }

  TEST_CASE("resolution algebra across tiers") {
    const auto cfg = ModelConfig::hrnn({64, 16, 4, 1}, {2, 2, 2, 4}, 3, 4);
    const std::int64_t len = 256;
    std::int64_t steps = len / cfg.top().frame_size;
    for (std::size_t k = cfg.tiers.size() - 1; k >= 1; --k) {
      const int r = cfg.tiers[k].frame_size / cfg.tiers[k - 1].frame_size;
      nn::Tensor<double> w({r * 3, 3});
      Mat<double> h = Mat<double>::Zero(steps, 3), out;
      conditioning_fanout(h, w, r, 1, out);
      CHECK(out.rows() == len / cfg.tiers[k - 1].frame_size);
      steps = out.rows();
    }
  }
}

TEST_SUITE("forward") {
  TEST_CASE("output length follows the padded length") {
    const std::vector<std::pair<int, int>> sizes{{16, 4}, {32, 8}, {64, 8}};
    for (const auto& [l3, l2] : sizes) {
      const auto cfg = ModelConfig::hrnn({l3, l2, 1}, {2, 2, 4}, 6, 4);
      const auto model = make_model<float>(cfg, 1);
      const auto x = random_levels(150, 2);
      const auto sb = make_sequence_batch({std::span<const std::uint8_t>(x)}, cfg);
      const auto logits = forward_all(*model, sb);
      CHECK(logits.rows() == (150 + l3 - 1) / l3 * l3);
      CHECK(logits.cols() == 256);
    }
  }

  TEST_CASE("zero parameters give uniform output") {
    for (auto cfg : {tiny_hrnn(), ModelConfig::full_srnn(8, 4)}) {
      auto model = make_model<double>(cfg, 3);
      for (auto& [name, t] : model->parameters()) t.fill(0.0);
      const auto x = random_levels(40, 4);
      const auto logits = forward_all(*model, make_sequence_batch({std::span<const std::uint8_t>(x)}, cfg));
      CHECK(logits.isZero());
      const auto y = generate(*model, QuantizedWaveform(x, 16000));
      for (auto q : y.levels()) CHECK(q == 0);
    }
  }

  TEST_CASE("generate follows forced logits") {
    auto model = make_model<float>(tiny_hrnn(), 5);
    auto& ps = model->parameters();
    for (auto& [name, t] : ps) t.fill(0.0f);
    ps[ps.find("tier1.ff1.bias")][77] = 1.0f;
    const auto x = random_levels(50, 6);
    const auto y = generate(*model, QuantizedWaveform(x, 16000), nullptr, 32);
    CHECK(y.size() == 50);
    for (auto q : y.levels()) CHECK(q == 77);
  }

  TEST_CASE("generate is deterministic and chunk-independent") {
    auto model = make_model<float>(tiny_hrnn(16, 8), 7);
    const QuantizedWaveform x(random_levels(333, 8), 16000);
    const auto a = generate(*model, x);
    CHECK(a.vec() == generate(*model, x).vec());
    CHECK(a.vec() == generate(*model, x, nullptr, 48).vec());
  }

  TEST_CASE("argmax ties go to the lowest level") {
    std::vector<float> v(256, 0.0f);
    v[9] = 2.0f;
    v[200] = 2.0f;
    CHECK(argmax_level(std::span<const float>(v)) == 9);
  }

  TEST_CASE("same seed, same initialization across precisions") {
    const auto f = make_model<float>(tiny_hrnn(), 11);
    const auto d = make_model<double>(tiny_hrnn(), 11);
    const auto& pf = f->parameters();
    const auto& pd = d->parameters();
    REQUIRE(pf.size() == pd.size());
    for (std::size_t i = 0; i < pf.size(); ++i) {
      CHECK(pf.name(i) == pd.name(i));
      for (std::size_t k = 0; k < pf[i].size(); ++k)
        REQUIRE(pf[i][k] == static_cast<float>(pd[i][k]));
    }
  }

  TEST_CASE("conditional model needs matching conditions") {
    const auto cfg = ModelConfig::full_chrnn(3, 25.0, 8, 4);
    auto model = make_model<float>(cfg, 1);
    const QuantizedWaveform x(random_levels(400, 1), 16000);
    CHECK_THROWS_AS(generate(*model, x), DataError);
    const auto wrong_shift = random_track(3, 3, 80, 1);
    CHECK_THROWS_AS(generate(*model, x, &wrong_shift), DataError);
    const auto wrong_dim = random_track(3, 4, 160, 1);
    CHECK_THROWS_AS(generate(*model, x, &wrong_dim), DataError);
    const auto ok = random_track(2, 3, 160, 1);
    CHECK(generate(*model, x, &ok).size() == 400);
  }
}

TEST_SUITE("receptive field") {
  TEST_CASE("HRNN logits ignore inputs past the frame lookahead") {
    const auto cfg = tiny_hrnn(8, 8);
    const auto model = make_model<double>(cfg, 21);
    std::mt19937_64 rng(22);
    const auto x = random_levels(160, 23);
    const auto base = forward_all(*model, make_sequence_batch({std::span<const std::uint8_t>(x)}, cfg));
    for (int trial = 0; trial < 40; ++trial) {
      auto y = x;
      const auto p = static_cast<std::int64_t>(rng() % y.size());
      y[static_cast<std::size_t>(p)] = static_cast<std::uint8_t>(y[static_cast<std::size_t>(p)] + 1 + rng() % 255);
      const auto pert = forward_all(*model, make_sequence_batch({std::span<const std::uint8_t>(y)}, cfg));
      bool changed_inside = false;
      for (std::int64_t t = 0; t < base.rows(); ++t) {
        if (p > receptive_bound(t, cfg))
          REQUIRE(pert.row(t) == base.row(t));
        else if (pert.row(t) != base.row(t))
          changed_inside = true;
      }
      CHECK(changed_inside);
    }
  }

  TEST_CASE("SRNN is causal") {
    const auto cfg = ModelConfig::full_srnn(8, 4);
    const auto model = make_model<double>(cfg, 31);
    const auto x = random_levels(60, 32);
    const auto base = forward_all(*model, make_sequence_batch({std::span<const std::uint8_t>(x)}, cfg));
    CHECK(base.rows() == 60);
    for (std::size_t u = 0; u < x.size(); u += 7) {
      auto y = x;
      y[u] ^= 0x5a;
      const auto pert = forward_all(*model, make_sequence_batch({std::span<const std::uint8_t>(y)}, cfg));
      for (std::size_t t = 0; t < u; ++t) REQUIRE(pert.row(static_cast<Eigen::Index>(t)) == base.row(static_cast<Eigen::Index>(t)));
      CHECK(pert.row(static_cast<Eigen::Index>(u)) != base.row(static_cast<Eigen::Index>(u)));
    }
  }
}

TEST_SUITE("gradients") {
  TEST_CASE("tiny HRNN, L = 32") {
    const auto model = make_model<double>(tiny_hrnn(), 41);
    const auto x = random_levels(32, 42);
    ModelObjective obj(*model, make_sequence_batch({std::span<const std::uint8_t>(x)}, model->config()), 43);
    const auto rep = nn::grad_check([&] { return obj.loss(); }, model->parameters(), obj.grads(), 1e-3);
    INFO(rep.worst_param << "[" << rep.worst_index << "] " << rep.worst_analytic << " vs " << rep.worst_numeric);
    CHECK(rep.passed);
  }

  TEST_CASE("batched HRNN with ragged rows") {
    const auto cfg = ModelConfig::hrnn({8, 2, 1}, {2, 3, 2}, 5, 3);
    const auto model = make_model<double>(cfg, 44);
    const auto a = random_levels(21, 45), b = random_levels(13, 46);
    ModelObjective obj(*model, make_sequence_batch({std::span<const std::uint8_t>(a), std::span<const std::uint8_t>(b)}, cfg), 47);
    const auto rep = nn::grad_check([&] { return obj.loss(); }, model->parameters(), obj.grads(), 1e-3);
    INFO(rep.worst_param << " " << rep.max_rel_error);
    CHECK(rep.passed);
  }

  TEST_CASE("conditional HRNN") {
    auto cfg = ModelConfig::hrnn({32, 8, 2, 1}, {1, 2, 2, 3}, 5, 3);
    cfg.tiers.back().kind = TierKind::Conditional;
    cfg.condition = ConditionSource::External;
    cfg.condition_dim = 3;
    const auto model = make_model<double>(cfg, 48);
    const auto x = random_levels(64, 49);
    ModelObjective obj(*model, make_sequence_batch({std::span<const std::uint8_t>(x)}, cfg, {random_track(2, 3, 32, 50)}), 51);
    const auto rep = nn::grad_check([&] { return obj.loss(); }, model->parameters(), obj.grads(), 1e-3);
    INFO(rep.worst_param << " " << rep.max_rel_error);
    CHECK(rep.passed);
  }

  TEST_CASE("SRNN") {
    const auto model = make_model<double>(ModelConfig::full_srnn(6, 3), 52);
    const auto x = random_levels(12, 53);
    ModelObjective obj(*model, make_sequence_batch({std::span<const std::uint8_t>(x)}, model->config()), 54);
    const auto rep = nn::grad_check([&] { return obj.loss(); }, model->parameters(), obj.grads(), 1e-3);
    INFO(rep.worst_param << " " << rep.max_rel_error);
    CHECK(rep.passed);
  }

  TEST_CASE("fan-out blocks only feeding masked positions get no gradient") {
    const auto model = make_model<double>(tiny_hrnn(), 55);
    const auto x = random_levels(2, 56);
    ModelObjective obj(*model, make_sequence_batch({std::span<const std::uint8_t>(x)}, model->config()), 57);
    const auto g = obj.grads();
    const auto& w = g[g.find("tier2.fanout.weight")];
    const std::int64_t d = model->config().tiers[0].hidden;
    const auto m = w.matrix();
    CHECK(m.middleRows(0, 2 * d).cwiseAbs().sum() > 0.0);
    CHECK(m.middleRows(2 * d, 2 * d).isZero());
  }

  TEST_CASE("gradients stop at the range start") {
    const auto model = make_model<double>(tiny_hrnn(), 58);
    const auto x = random_levels(64, 59);
    const auto sb = make_sequence_batch({std::span<const std::uint8_t>(x)}, model->config());
    auto state = model->zero_state(1);
    Mat<double> logits;
    model->forward(sb, 0, 32, state, logits, false);
    auto carried = state;
    auto cache = model->forward(sb, 32, 64, state, logits, true);
    Mat<double> dl = Mat<double>::Random(logits.rows(), 256);
    auto g = model->parameters().zeros_like();
    model->backward(*cache, dl, g);
    // Finite differences with the carried state held fixed.
    auto& ps = model->parameters();
    auto loss = [&] {
      auto s = carried;
      Mat<double> l;
      model->forward(sb, 32, 64, s, l, false);
      return (l.array() * dl.array()).sum();
    };
    nn::GradCheckOptions opts;
    opts.max_entries_per_tensor = 40;
    const auto rep = nn::grad_check(loss, ps, g, 1e-3, opts);
    CHECK(rep.passed);
  }
}

TEST_SUITE("chunking") {
  TEST_CASE("chunked forward equals a single pass") {
    auto chrnn = ModelConfig::full_chrnn(5, 25.0, 8, 4);
    for (const auto& cfg : {tiny_hrnn(), ModelConfig::full_srnn(8, 4), chrnn}) {
      const auto model = make_model<float>(cfg, 61);
      const auto a = random_levels(700, 62), b = random_levels(480, 63);
      std::vector<ConditionTrack> conds;
      if (cfg.conditional()) conds = {random_track(5, 5, 160, 64), random_track(3, 5, 160, 65)};
      const auto sb = make_sequence_batch({std::span<const std::uint8_t>(a), std::span<const std::uint8_t>(b)}, cfg, conds);
      const auto whole = forward_all(*model, sb);
      auto state = model->zero_state(2);
      const std::int64_t chunk = cfg.conditional() ? 160 : 96;
      for (std::int64_t s = 0; s < sb.model_len; s += chunk) {
        const std::int64_t e = std::min(sb.model_len, s + chunk);
        Mat<float> part;
        model->forward(sb, s, e, state, part, false);
        const float diff = (part - whole.middleRows(s * 2, (e - s) * 2)).cwiseAbs().maxCoeff();
        REQUIRE(diff < 1e-5f);
      }
    }
  }
}
