#!/usr/bin/env python3
"""Build synthesiser parameters by hand and render audio.

Walks the two-branch signal path: a band-limited sawtooth driven by an F0
contour, uniform noise, per-frame FIR filters from log-magnitude samples, and
the summed output. Writes WAVs into demos/output/.
"""

from pathlib import Path

import numpy as np

import voicemorph as vm

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

SR = 16000
HOP = 160
T = 200  # frames -> 2 seconds

# --- an F0 contour with vibrato and a short unvoiced gap -------------------
f0 = 120.0 + 15.0 * np.sin(2 * np.pi * np.arange(T) / 50.0)
f0[90:100] = 0.0

cfg = vm.SynthConfig(sample_rate=SR, frame_hop=HOP, noise_seed=42)
sawtooth = vm.synth_harmonic_unfiltered(f0, cfg)
print(f"harmonic source: {len(sawtooth)} samples, "
      f"peak {np.abs(sawtooth).max():.2f}, rms {np.sqrt(np.mean(sawtooth**2)):.3f}")

# --- harmonic filter: two formant-like bumps over a tilted base ------------
freqs = np.linspace(0.0, SR / 2, 176)
formants = (1.2 * np.exp(-0.5 * ((freqs - 700) / 150) ** 2)
            + 0.9 * np.exp(-0.5 * ((freqs - 1800) / 250) ** 2))
harm_row = -2.0 - freqs / 4000.0 + formants
harm_logmag = np.tile(harm_row, (T, 1))

# --- noise filter: quiet high-shelf breathiness -----------------------------
noise_freqs = np.linspace(0.0, SR / 2, 80)
noise_row = np.where(noise_freqs > 3000.0, -4.5, -7.0)
noise_logmag = np.tile(noise_row, (T, 1))

params = vm.SynthParamsSeq(f0, harm_logmag, noise_logmag, HOP)
audio = vm.synthesize(params, cfg)
vm.write_wav(OUT / "vowel_like.wav", audio)
print(f"wrote {OUT / 'vowel_like.wav'}: {audio.duration:.2f} s")

# --- inspect the result: where did the energy land? ------------------------
spectrum = np.abs(np.fft.rfft(audio.samples * np.hanning(len(audio.samples))))
bins = np.fft.rfftfreq(len(audio.samples), 1 / SR)
for lo, hi in ((0, 500), (500, 1000), (1000, 2500), (2500, 5000), (5000, 8000)):
    band = (bins >= lo) & (bins < hi)
    level = 10 * np.log10(np.sum(spectrum[band] ** 2) + 1e-12)
    print(f"  {lo:5d}-{hi:5d} Hz: {level:7.1f} dB")

# --- branch isolation: silence the noise and listen to the sawtooth alone --
harmonic_only = vm.SynthParamsSeq(f0, harm_logmag, np.full((T, 80), -40.0), HOP)
vm.write_wav(OUT / "harmonic_only.wav", vm.synthesize(harmonic_only, cfg))
print(f"wrote {OUT / 'harmonic_only.wav'} (noise branch annihilated)")
