#include <doctest.h>

#include "bwe/error.hpp"
#include "bwe/run_config.hpp"

using namespace bwe;

TEST_SUITE("text config") {
  TEST_CASE("parsing") {
    const auto t = TextConfig::parse(
        "# comment\n\nmodel.hidden = 32   # trailing\n  train.lr=0.01\r\ndata.train = a b.tsv\n");
    CHECK(t.get("model.hidden") == "32");
    CHECK(t.get("train.lr") == "0.01");
    CHECK(t.get("data.train") == "a b.tsv");
    CHECK_FALSE(t.get("model.kind"));
    CHECK(t.entries().size() == 3);
    CHECK(TextConfig::parse(t.serialize()).entries() == t.entries());
  }

  TEST_CASE("malformed input names the line") {
    CHECK_THROWS_WITH_AS(TextConfig::parse("a.b = 1\na.b = 2\n", "x.conf"),
                         doctest::Contains("x.conf:2"), ConfigError);
    CHECK_THROWS_WITH_AS(TextConfig::parse("a.b = 1\na.b = 2\n"), doctest::Contains("'a.b'"),
                         ConfigError);
    CHECK_THROWS_AS(TextConfig::parse("novalue\n"), ConfigError);
    CHECK_THROWS_AS(TextConfig::parse("nosection = 1\n"), ConfigError);
    CHECK_THROWS_AS(TextConfig::parse("bad key.x = 1\n"), ConfigError);
  }
}

TEST_SUITE("run config") {
  TEST_CASE("defaults are desk scale") {
    const RunConfig rc;
    CHECK(rc.model == ModelConfig::full_hrnn(32, 16));
    CHECK(rc.train.batch_size == 8);
    CHECK(rc.train.lr == 1e-3);
    CHECK(rc.train.patience == 5);
    CHECK(rc.train.clip_norm == 5.0);
    CHECK(rc.train.chunk_len == 480);
    CHECK(RunConfig::full().model == ModelConfig::full_hrnn());
    CHECK(RunConfig::full().train.batch_size == 64);
    CHECK(RunConfig::from_text(TextConfig{}).model == rc.model);
  }

  TEST_CASE("text round trip") {
    RunConfig rc;
    rc.model = ModelConfig::full_hrnn(24, 12);
    rc.model.hf_gain = 2.5;
    rc.model.strategy = Strategy::Wideband;
    rc.train.lr = 0.0003;
    rc.train.seed = 77;
    rc.eval.lsd_shift = 128;
    rc.data.train = "/data/train.tsv";
    const auto back = RunConfig::from_text(TextConfig::parse(rc.to_text().serialize()));
    CHECK(back.model == rc.model);
    CHECK(back.train.lr == rc.train.lr);
    CHECK(back.train.seed == 77);
    CHECK(back.eval.lsd_shift == 128);
    CHECK(back.data.train == rc.data.train);
    CHECK(back.to_text().serialize() == rc.to_text().serialize());

    for (const auto& m : {ModelConfig::full_srnn(16, 8), ModelConfig::full_chrnn(39, 25.0, 16, 8)}) {
      RunConfig r;
      r.model = m;
      if (m.conditional()) r.model.condition = ConditionSource::Mfcc;
      CHECK(RunConfig::from_text(r.to_text()).model == r.model);
    }
  }

  TEST_CASE("model variants from text") {
    const auto srnn = RunConfig::from_text(TextConfig::parse("model.kind = srnn\nmodel.hidden = 64\n"));
    CHECK(srnn.model.kind == ModelKind::Srnn);
    CHECK(srnn.model.hidden == 64);

    const auto chrnn = RunConfig::from_text(TextConfig::parse(
        "model.frame_sizes = 160,16,4,1\nmodel.concat = 1,2,2,4\nmodel.condition = mfcc\n"));
    CHECK(chrnn.model.conditional());
    CHECK(chrnn.model.condition_dim == 39);
    CHECK(chrnn.model.condition_window_ms == 25.0);
    CHECK(max_latency_ms(chrnn.model, 16000) == 25.0);

    const auto ext = RunConfig::from_text(TextConfig::parse(
        "model.frame_sizes = 160,16,4,1\nmodel.concat = 1,2,2,4\nmodel.condition = external\n"
        "model.condition_dim = 64\nmodel.condition_window_ms = 10\n"));
    CHECK(ext.model.condition == ConditionSource::External);
    CHECK(ext.model.condition_dim == 64);
  }

  TEST_CASE("invalid values") {
    auto bad = [](const std::string& s) {
      CHECK_THROWS_AS(RunConfig::from_text(TextConfig::parse(s)), ConfigError);
    };
    bad("model.hiden = 3\n");
    bad("model.hidden = many\n");
    bad("model.hidden = 3.5\n");
    bad("train.lr = nan\n");
    bad("train.batch_size = 0\n");
    bad("train.patience = 300\n");
    bad("train.clip_norm = -1\n");
    bad("model.kind = cnn\n");
    bad("model.strategy = lf\n");
    bad("model.kind = srnn\nmodel.frame_sizes = 16,4,1\n");
    bad("model.frame_sizes = 16,4,1\nmodel.concat = 2,2\n");
    bad("model.frame_sizes = 16,5,1\n");
    bad("model.condition = mfcc\n");  // no conditional tier of frame 160
    bad("model.frame_sizes = 160,16,4,1\nmodel.concat = 1,2,2,4\nmodel.condition = mfcc\n"
        "model.condition_dim = 13\n");
    bad("eval.lsd_shift = 1024\n");
  }

  TEST_CASE("relative data paths resolve against the config directory") {
    const auto rc = RunConfig::from_text(
        TextConfig::parse("data.train = t.tsv\ndata.valid = /abs/v.tsv\n"), "/cfg/dir");
    CHECK(rc.data.train == std::filesystem::path("/cfg/dir/t.tsv"));
    CHECK(rc.data.valid == std::filesystem::path("/abs/v.tsv"));
  }
}

TEST_CASE("values that would not survive serialization are refused") {
  TextConfig t;
  CHECK_THROWS_AS(t.set("data.train", "a#b.tsv"), ConfigError);
  CHECK_THROWS_AS(t.set("data.train", "a\nb"), ConfigError);
  CHECK_THROWS_AS(t.set("nokey", "1"), ConfigError);
  CHECK_NOTHROW(t.set("data.train", "dir/a b.tsv"));
}
