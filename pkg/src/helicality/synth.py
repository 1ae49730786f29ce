"""Synthetic corpora: band-limited sawtooth tones on the quarter-tone grid, and white noise."""
from __future__ import annotations

import csv
import os

import numpy as np
from scipy.io import wavfile

DEFAULT_SR = 22050
DEFAULT_DURATION = 1.2
AMPLITUDES = (0.1, 0.2, 0.4, 0.8)


def sawtooth(freq, amplitude, duration=DEFAULT_DURATION, sr=DEFAULT_SR, rng=None, fade=0.01):
    """Additive sawtooth below Nyquist, peak-normalized to ``amplitude``.

    With ``rng`` the waveform starts at a random point of its cycle (a time
    shift, so every harmonic keeps the sawtooth phase relationship).
    """
    n = int(round(duration * sr))
    t = np.arange(n) / sr
    n_harm = int((sr / 2.0) // freq)
    h = np.arange(1, n_harm + 1)
    start = rng.uniform(0.0, 2 * np.pi) if rng is not None else 0.0
    phases = h * start
    x = (np.sin(2 * np.pi * freq * h[:, None] * t[None, :] + phases[:, None]) / h[:, None]).sum(axis=0)
    x *= amplitude / np.abs(x).max()
    ramp = int(fade * sr)
    if ramp:
        env = np.ones(n)
        env[:ramp] = np.linspace(0.0, 1.0, ramp)
        env[-ramp:] = np.linspace(1.0, 0.0, ramp)
        x *= env
    return x


def white_noise(amplitude, duration=DEFAULT_DURATION, sr=DEFAULT_SR, rng=None):
    rng = rng or np.random.default_rng()
    x = rng.standard_normal(int(round(duration * sr)))
    return x * (amplitude / np.abs(x).max())


def write_wav(path, samples, sr=DEFAULT_SR):
    """16-bit PCM."""
    pcm = np.clip(np.round(np.asarray(samples) * 32767.0), -32768, 32767).astype(np.int16)
    wavfile.write(path, sr, pcm)


def _write_manifest(directory, rows):
    path = os.path.join(directory, "manifest.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["path", "group"])
        w.writerows(rows)
    return path


def harmonic_corpus(directory, seed=0, base_freq=32.703 * 4, q=24, n_octaves=3,
                    amplitudes=AMPLITUDES, duration=DEFAULT_DURATION, sr=DEFAULT_SR):
    """Write ``q * n_octaves * len(amplitudes)`` sawtooth tones and a manifest; return its path."""
    os.makedirs(directory, exist_ok=True)
    rng = np.random.default_rng(seed)
    rows = []
    for k in range(q * n_octaves):
        f = base_freq * 2.0 ** (k / q)
        for a in amplitudes:
            name = f"saw_{k:03d}_{a:.2f}.wav"
            write_wav(os.path.join(directory, name), sawtooth(f, a, duration, sr, rng), sr)
            rows.append((name, "harmonic"))
    return _write_manifest(directory, rows)


def noise_corpus(directory, seed=0, n_files=288, amplitudes=AMPLITUDES, duration=DEFAULT_DURATION, sr=DEFAULT_SR):
    os.makedirs(directory, exist_ok=True)
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n_files):
        a = amplitudes[i % len(amplitudes)]
        name = f"noise_{i:03d}.wav"
        write_wav(os.path.join(directory, name), white_noise(a, duration, sr, rng), sr)
        rows.append((name, "noise"))
    return _write_manifest(directory, rows)
