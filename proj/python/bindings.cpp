#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "bwe/cli/cli.hpp"
#include "bwe/data/io.hpp"
#include "bwe/dsp/fir.hpp"
#include "bwe/dsp/mfcc.hpp"
#include "bwe/dsp/mulaw.hpp"
#include "bwe/error.hpp"
#include "bwe/eval/metrics.hpp"
#include "bwe/run_config.hpp"
#include "bwe/train/checkpoint.hpp"

namespace py = pybind11;
using namespace bwe;

namespace {

using F64 = py::array_t<double, py::array::c_style | py::array::forcecast>;
using U8 = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vec(const F64& a) {
  if (a.ndim() != 1) throw ParameterError("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

template <typename T>
py::array_t<T> to_array(const std::vector<T>& v) {
  py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Waveform wave(const F64& a, int rate) { return Waveform(to_vec(a), rate); }

class Model {
 public:
  explicit Model(Checkpoint ck) : ck_(std::move(ck)), model_(ck_.make_model<float>()) {}

  static Model load(const std::filesystem::path& p) { return Model(load_checkpoint(p)); }

  py::array_t<double> extend(const F64& nb_samples, std::optional<std::filesystem::path> features) const {
    const ModelConfig& mc = ck_.config.model;
    const Waveform nb = wave(nb_samples, kNarrowbandRate);
    if (nb.empty()) throw DataError("no samples");
    std::optional<ConditionTrack> cond;
    if (mc.condition == ConditionSource::Mfcc) cond = mfcc(nb, MfccConfig::narrowband());
    if (mc.condition == ConditionSource::External) {
      if (!features) throw DataError("model is conditioned on external features");
      cond = load_features(*features);
    }
    Waveform wide;
    {
      py::gil_scoped_release release;
      const auto y = generate(*model_, mulaw_encode(upsample2(nb)), cond ? &*cond : nullptr);
      wide = reconstruct_wideband(nb, y, mc.strategy, mc.hf_gain);
    }
    return to_array(wide.vec());
  }

  py::array_t<std::uint8_t> generate_levels(const U8& levels) const {
    if (model_->config().conditional()) throw ParameterError("conditional model: use extend()");
    const QuantizedWaveform x({levels.data(), levels.data() + levels.size()}, kWidebandRate);
    QuantizedWaveform y;
    {
      py::gil_scoped_release release;
      y = generate(*model_, x);
    }
    return to_array(y.vec());
  }

  std::string config_text() const { return ck_.config.to_text().serialize(); }
  int epoch() const { return ck_.epoch; }
  double best_valid_ce() const { return ck_.best_valid_ce; }

 private:
  Checkpoint ck_;
  std::unique_ptr<WaveformModel<float>> model_;
};

}  // namespace

PYBIND11_MODULE(_bwe, m) {
  m.doc() = "Waveform-domain bandwidth extension with hierarchical RNNs";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  m.def("mulaw_encode", [](const F64& x) { return to_array(mulaw_encode(wave(x, kWidebandRate)).vec()); },
        py::arg("samples"));
  m.def("mulaw_decode",
        [](const U8& q) {
          return to_array(mulaw_decode(QuantizedWaveform({q.data(), q.data() + q.size()}, kWidebandRate)).vec());
        },
        py::arg("levels"));
  m.def("downsample2", [](const F64& x) { return to_array(downsample2(wave(x, kWidebandRate)).vec()); },
        py::arg("wideband"), "16 kHz -> 8 kHz through the 3.6 kHz anti-alias lowpass.");
  m.def("upsample2", [](const F64& x) { return to_array(upsample2(wave(x, kNarrowbandRate)).vec()); },
        py::arg("narrowband"), "8 kHz -> 16 kHz by zero insertion and lowpass.");
  m.def("mfcc",
        [](const F64& x) {
          const auto t = mfcc(wave(x, kNarrowbandRate), MfccConfig::narrowband());
          py::array_t<float> out({static_cast<py::ssize_t>(t.n_frames()), static_cast<py::ssize_t>(t.dim)});
          std::copy(t.frames.begin(), t.frames.end(), out.mutable_data());
          return out;
        },
        py::arg("narrowband"), "39-dim MFCC (+deltas) of 8 kHz audio, one row per 10 ms.");

  m.def("snr_db", [](const F64& r, const F64& d, double cap) {
          return snr_db(wave(r, kWidebandRate), wave(d, kWidebandRate), cap);
        },
        py::arg("reference"), py::arg("degraded"), py::arg("cap_db") = kSnrCapDb);
  m.def("lsd_db", [](const F64& r, const F64& d, std::size_t frame, std::size_t shift) {
          return lsd_db(wave(r, kWidebandRate), wave(d, kWidebandRate), {frame, shift, 1e-10});
        },
        py::arg("reference"), py::arg("degraded"), py::arg("frame") = 512, py::arg("shift") = 256);
  m.def("band_lsd_db", [](const F64& r, const F64& d, double lo, double hi) {
          return band_lsd_db(wave(r, kWidebandRate), wave(d, kWidebandRate), lo, hi);
        },
        py::arg("reference"), py::arg("degraded"), py::arg("lo_hz"), py::arg("hi_hz"));

  m.def("max_latency_ms",
        [](const std::filesystem::path& config) {
          return max_latency_ms(RunConfig::load(config).model, kWidebandRate);
        },
        py::arg("config"));

  m.def("load_wav",
        [](const std::filesystem::path& p) {
          const auto w = load_wav(p);
          return py::make_tuple(to_array(w.vec()), w.sample_rate());
        },
        py::arg("path"));
  m.def("save_wav", [](const std::filesystem::path& p, const F64& x, int rate) { save_wav(p, wave(x, rate)); },
        py::arg("path"), py::arg("samples"), py::arg("sample_rate"));

  py::class_<Model>(m, "Model")
      .def_static("load", &Model::load, py::arg("path"))
      .def("extend", &Model::extend, py::arg("narrowband"), py::arg("features") = std::nullopt,
           "Wideband 16 kHz reconstruction of 8 kHz input.")
      .def("generate", &Model::generate_levels, py::arg("levels"))
      .def_property_readonly("config_text", &Model::config_text)
      .def_property_readonly("epoch", &Model::epoch)
      .def_property_readonly("best_valid_ce", &Model::best_valid_ce);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          int code;
          {
            py::gil_scoped_release release;
            code = cli::run(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the bwe command line; returns (exit code, stdout, stderr).");
}
