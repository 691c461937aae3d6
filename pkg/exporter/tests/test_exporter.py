import struct

import numpy as np
import pytest

from featexport import (
    BadAudioError,
    ExportSpec,
    FilterbankBackend,
    ModelUnavailableError,
    export_layer,
    export_prosody,
)
from featexport.cli import main
from featexport.prosody import f0_column, loudness_column, znorm_log_f0

SR = 16000


def write_wav(path, samples, rate=SR):
    ints = np.clip(np.asarray(samples) * 32768, -32768, 32767).astype("<i2")
    payload = ints.tobytes()
    header = b"".join([
        b"RIFF", struct.pack("<I", 36 + len(payload)), b"WAVE",
        b"fmt ", struct.pack("<IHHIIHH", 16, 1, 1, rate, rate * 2, 2, 16),
        b"data", struct.pack("<I", len(payload)),
    ])
    path.write_bytes(header + payload)


def tone(freq, seconds=2.0, amp=0.5):
    t = np.arange(int(SR * seconds)) / SR
    return amp * np.sin(2 * np.pi * freq * t)


def vibrato(seconds=2.0):
    t = np.arange(int(SR * seconds)) / SR
    inst = 150 + 20 * np.sin(2 * np.pi * 3 * t)
    return 0.5 * np.sin(2 * np.pi * np.cumsum(inst) / SR)


class TestExportLayer:
    def test_two_second_geometry(self, tmp_path):
        wav = tmp_path / "a.wav"
        write_wav(wav, vibrato())
        spec = ExportSpec([wav], layer=6, out_dir=tmp_path / "out",
                          backend=FilterbankBackend())
        (path,) = export_layer(spec)
        raw = path.read_bytes()
        magic, version, t, d, hop = raw[:4], *struct.unpack_from("<IIII", raw, 4)
        assert magic == b"DQF1" and version == 1
        assert 95 <= t <= 105
        assert d == 1024
        assert hop == 320
        assert len(raw) == 20 + 4 * t * d

    def test_deterministic_bytes(self, tmp_path):
        wav = tmp_path / "a.wav"
        write_wav(wav, vibrato())
        backend = FilterbankBackend()
        p1 = export_layer(ExportSpec([wav], 6, tmp_path / "o1", backend=backend))[0]
        p2 = export_layer(ExportSpec([wav], 6, tmp_path / "o2", backend=backend))[0]
        assert p1.read_bytes() == p2.read_bytes()

    def test_layers_differ(self, tmp_path):
        wav = tmp_path / "a.wav"
        write_wav(wav, vibrato())
        backend = FilterbankBackend()
        p6 = export_layer(ExportSpec([wav], 6, tmp_path / "o6", backend=backend))[0]
        p12 = export_layer(ExportSpec([wav], 12, tmp_path / "o12", backend=backend))[0]
        assert p6.read_bytes() != p12.read_bytes()

    def test_wrong_rate_rejected(self, tmp_path):
        wav = tmp_path / "slow.wav"
        write_wav(wav, np.zeros(8000), rate=8000)
        spec = ExportSpec([wav], 6, tmp_path / "out", backend=FilterbankBackend())
        with pytest.raises(BadAudioError):
            export_layer(spec)

    def test_invalid_layer_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            ExportSpec([], layer=7, out_dir=tmp_path)

    def test_model_unavailable(self, tmp_path):
        wav = tmp_path / "a.wav"
        write_wav(wav, vibrato())
        spec = ExportSpec([wav], 6, tmp_path / "out",
                          model_path=str(tmp_path / "no-model-here"))
        with pytest.raises(ModelUnavailableError):
            export_layer(spec)


class TestExportProsody:
    def test_silence_columns(self, tmp_path):
        wav = tmp_path / "s.wav"
        write_wav(wav, np.zeros(2 * SR))
        with pytest.warns(RuntimeWarning):
            out = export_prosody(wav, tmp_path / "s.dqf", backend=FilterbankBackend())
        raw = out.read_bytes()
        _, t, d, hop = struct.unpack_from("<IIII", raw, 4)
        assert d == 1026 and hop == 320
        frames = np.frombuffer(raw[20:], dtype="<f4").reshape(t, d)
        np.testing.assert_allclose(frames[:, 1024], 20 * np.log10(1e-7), atol=1e-4)
        np.testing.assert_array_equal(frames[:, 1025], 0.0)

    def test_constant_tone_flags_zero_variance(self, tmp_path):
        wav = tmp_path / "t.wav"
        write_wav(wav, tone(220.0))
        with pytest.warns(RuntimeWarning, match="zero variance"):
            out = export_prosody(wav, tmp_path / "t.dqf", backend=FilterbankBackend())
        raw = out.read_bytes()
        _, t, d, _ = struct.unpack_from("<IIII", raw, 4)
        frames = np.frombuffer(raw[20:], dtype="<f4").reshape(t, d)
        np.testing.assert_array_equal(frames[:, 1025], 0.0)

    def test_voiced_column_norm(self, tmp_path):
        wav = tmp_path / "v.wav"
        write_wav(wav, vibrato())
        out = export_prosody(wav, tmp_path / "v.dqf", backend=FilterbankBackend())
        raw = out.read_bytes()
        _, t, d, _ = struct.unpack_from("<IIII", raw, 4)
        frames = np.frombuffer(raw[20:], dtype="<f4").reshape(t, d)
        pitch = frames[:, 1025]
        voiced = pitch[pitch != 0.0]
        assert len(voiced) > 10
        assert abs(voiced.mean()) < 0.3      # padding rows shift it slightly


class TestProsodyPrimitives:
    def test_f0_on_tone(self):
        f0 = f0_column(tone(220.0))
        voiced = f0[f0 > 0]
        assert len(voiced) == len(f0)
        assert np.all(np.abs(voiced - 220.0) < 1.0)

    def test_loudness_floor(self):
        np.testing.assert_allclose(loudness_column(np.zeros(SR)),
                                   20 * np.log10(1e-7))

    def test_znorm_two_values(self):
        out = znorm_log_f0(np.array([100.0, 200.0]))
        np.testing.assert_allclose(out, [-1.0, 1.0], atol=1e-12)


class TestCli:
    def test_export_command(self, tmp_path):
        wav = tmp_path / "a.wav"
        write_wav(wav, vibrato())
        rc = main(["export", str(wav), "--layer", "6", "--backend", "fbank",
                   "--out-dir", str(tmp_path / "out")])
        assert rc == 0
        assert (tmp_path / "out" / "a.dqf").exists()

    def test_prosody_command(self, tmp_path):
        wav = tmp_path / "a.wav"
        write_wav(wav, vibrato())
        rc = main(["export", str(wav), "--prosody", "--backend", "fbank",
                   "--out-dir", str(tmp_path / "out")])
        assert rc == 0
        raw = (tmp_path / "out" / "a.dqf").read_bytes()
        assert struct.unpack_from("<IIII", raw, 4)[2] == 1026

    def test_bad_audio_exit_2(self, tmp_path):
        wav = tmp_path / "bad.wav"
        wav.write_bytes(b"not audio at all")
        rc = main(["export", str(wav), "--backend", "fbank",
                   "--out-dir", str(tmp_path / "out")])
        assert rc == 2
