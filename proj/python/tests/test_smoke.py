import math
from pathlib import Path

import numpy as np
import pytest

import bwe

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def tone(freq, n, rate=16000, amp=0.3):
    return amp * np.sin(2 * np.pi * freq * np.arange(n) / rate)


def test_mulaw_levels_round_trip():
    levels = np.arange(256, dtype=np.uint8)
    assert np.array_equal(bwe.mulaw_encode(bwe.mulaw_decode(levels)), levels)


def test_mulaw_clamps_out_of_range():
    q = bwe.mulaw_encode(np.array([-3.0, 3.0]))
    assert q.tolist() == [0, 255]


def test_resampling_lengths_and_passband():
    x = tone(1000, 16000)
    nb = bwe.downsample2(x)
    assert nb.shape == (8000,)
    up = bwe.upsample2(nb)
    assert up.shape == (16000,)
    mid = slice(1000, 15000)
    assert np.max(np.abs(up[mid] - x[mid])) < 1e-2


def test_mfcc_shape():
    feats = bwe.mfcc(tone(500, 8000, rate=8000))
    assert feats.dtype == np.float32
    assert feats.shape[1] == 39
    assert feats.shape[0] == 98


def test_metrics():
    x = tone(1000, 16000)
    assert bwe.snr_db(x, x) == 120.0
    assert bwe.lsd_db(x, 0.5 * x) == pytest.approx(20 * math.log10(2), abs=0.01)
    y = tone(3000, 16000, amp=0.1)
    assert bwe.lsd_db(x, y) == pytest.approx(bwe.lsd_db(y, x), abs=1e-9)
    assert bwe.band_lsd_db(x, x, 4000, 8000) == 0.0


def test_latency_of_shipped_configs():
    assert bwe.max_latency_ms(CONFIGS / "full_hrnn.conf") == 1.9375
    assert bwe.max_latency_ms(CONFIGS / "full_srnn.conf") == 0.0
    assert bwe.max_latency_ms(CONFIGS / "full_chrnn.conf") == 25.0


def test_errors_map_to_exception_classes(tmp_path):
    with pytest.raises(bwe.DataError):
        bwe.load_wav(tmp_path / "missing.wav")
    bad = tmp_path / "bad.conf"
    bad.write_text("model.nonsense = 1\n")
    with pytest.raises(bwe.ConfigError):
        bwe.max_latency_ms(bad)
    assert issubclass(bwe.ConfigError, bwe.Error)


def test_wav_round_trip(tmp_path):
    x = np.round(tone(440, 800) * 32768) / 32768
    bwe.save_wav(tmp_path / "a.wav", x, 16000)
    y, rate = bwe.load_wav(tmp_path / "a.wav")
    assert rate == 16000
    assert np.array_equal(x, y)


def test_train_and_extend(tmp_path):
    wav = tmp_path / "wav"
    wav.mkdir()
    lines = []
    for u in range(3):
        x = tone(1000, 2000) + tone(6000, 2000, amp=0.08 + 0.02 * u)
        bwe.save_wav(wav / f"u{u}.wav", x, 16000)
        lines.append(f"u{u}\twav/u{u}.wav")
    (tmp_path / "train.tsv").write_text("\n".join(lines[:2]) + "\n")
    (tmp_path / "valid.tsv").write_text(lines[2] + "\n")
    (tmp_path / "run.conf").write_text(
        "model.hidden = 8\nmodel.embed_dim = 4\ntrain.max_epochs = 2\ntrain.patience = 2\n"
        "data.train = train.tsv\ndata.valid = valid.tsv\n")
    ckpt = tmp_path / "m.bweh"
    code, out, err = bwe.run_cli(["train", "--config", str(tmp_path / "run.conf"), "--out", str(ckpt)])
    assert code == 0, err
    assert "best epoch" in out

    model = bwe.Model.load(ckpt)
    assert model.epoch in (1, 2)
    assert "model.hidden = 8" in model.config_text
    nb = bwe.downsample2(tone(1000, 1600))
    wide = model.extend(nb)
    assert wide.shape == (1600,)
    assert np.all(np.abs(wide) <= 1.0)
    assert np.array_equal(wide, model.extend(nb))
    levels = model.generate(bwe.mulaw_encode(bwe.upsample2(nb)))
    assert levels.dtype == np.uint8 and levels.shape == (1600,)


def test_cli_bad_arguments():
    code, _, err = bwe.run_cli(["train", "--no-such-flag"])
    assert code == 1
    assert err
