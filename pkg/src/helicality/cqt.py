"""Audio decoding, constant-Q analysis, and reduction to one feature vector per file."""
from __future__ import annotations

import csv
import logging
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.io import wavfile
from scipy.signal import resample_poly

from .errors import (
    AudioTooShort,
    DataError,
    DegenerateVariance,
    EmptyAudio,
    NyquistViolation,
    ShapeMismatch,
    UnreadableFile,
    UnsupportedEncoding,
)

logger = logging.getLogger(__name__)

# WAVE_FORMAT_PCM, WAVE_FORMAT_IEEE_FLOAT, WAVE_FORMAT_EXTENSIBLE
_PCM_TAGS = (0x0001, 0x0003)
_EXTENSIBLE = 0xFFFE
_KERNEL_THRESHOLD = 5e-4


@dataclass(frozen=True)
class CqtParams:
    bins_per_octave: int = 24
    n_octaves_computed: int = 8
    f_min: float = 32.703
    hop_length: int = 512
    target_sample_rate: int = 22050

    def __post_init__(self):
        if self.bins_per_octave < 1 or self.n_octaves_computed < 1:
            raise NyquistViolation("bins_per_octave and n_octaves_computed must be >= 1")
        if self.hop_length < 1 or self.target_sample_rate < 1 or not self.f_min > 0:
            raise NyquistViolation("hop_length, target_sample_rate and f_min must be positive")
        self.check_nyquist(self.target_sample_rate)

    def check_nyquist(self, sample_rate):
        top = self.f_min * 2.0 ** self.n_octaves_computed
        if not top < sample_rate / 2.0:
            raise NyquistViolation(
                f"f_min * 2**n_octaves = {top:.1f} Hz is not below Nyquist ({sample_rate / 2.0:.1f} Hz)"
            )

    @property
    def n_bins(self) -> int:
        return self.bins_per_octave * self.n_octaves_computed

    @property
    def quality(self) -> float:
        return 1.0 / (2.0 ** (1.0 / self.bins_per_octave) - 1.0)

    def frequencies(self) -> np.ndarray:
        k = np.arange(self.n_bins)
        return self.f_min * 2.0 ** (k / self.bins_per_octave)

    def window_lengths(self, sample_rate=None) -> np.ndarray:
        sr = self.target_sample_rate if sample_rate is None else sample_rate
        return np.ceil(self.quality * sr / self.frequencies()).astype(int)


@dataclass
class AudioBuffer:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("AudioBuffer holds mono samples")
        if self.samples.size == 0:
            raise EmptyAudio("audio buffer has zero samples")
        if not np.all(np.isfinite(self.samples)):
            raise DataError("audio buffer contains non-finite samples")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")


@dataclass
class CqtSpectrum:
    magnitudes: np.ndarray
    params: CqtParams

    @property
    def n_frames(self) -> int:
        return self.magnitudes.shape[1]


@dataclass
class FeatureMatrix:
    """``P x N`` matrix of loudest-frame CQT magnitudes over a window of octaves."""

    data: np.ndarray
    bin_offset: int
    params: CqtParams
    file_ids: list = field(default_factory=list)

    @property
    def n_bins(self) -> int:
        return self.data.shape[0]

    @property
    def n_files(self) -> int:
        return self.data.shape[1]

    def frequencies(self) -> np.ndarray:
        k = self.bin_offset + np.arange(self.n_bins)
        return self.params.f_min * 2.0 ** (k / self.params.bins_per_octave)


def _wav_format_tag(path):
    """Return the WAVE format tag from the ``fmt `` chunk, or raise UnreadableFile."""
    try:
        with open(path, "rb") as fh:
            head = fh.read(12)
            if len(head) < 12 or head[:4] not in (b"RIFF", b"RIFX") or head[8:12] != b"WAVE":
                raise UnreadableFile(f"{path}: not a RIFF/WAVE file")
            endian = "<" if head[:4] == b"RIFF" else ">"
            while True:
                chunk = fh.read(8)
                if len(chunk) < 8:
                    raise UnreadableFile(f"{path}: no fmt chunk")
                cid, size = chunk[:4], struct.unpack(endian + "I", chunk[4:])[0]
                if cid == b"fmt ":
                    body = fh.read(size)
                    tag = struct.unpack(endian + "H", body[:2])[0]
                    if tag == _EXTENSIBLE and len(body) >= 26:
                        tag = struct.unpack(endian + "H", body[24:26])[0]
                    return tag
                fh.seek(size + (size & 1), os.SEEK_CUR)
    except OSError as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc


def load_audio(path, target_sample_rate: int = 22050) -> AudioBuffer:
    """Read a PCM/float WAV file as mono float samples at ``target_sample_rate``.

    Stereo is downmixed by the channel mean; resampling uses a polyphase
    Kaiser-windowed sinc filter.
    """
    tag = _wav_format_tag(path)
    if tag not in _PCM_TAGS:
        raise UnsupportedEncoding(f"{path}: WAVE format tag 0x{tag:04x} is not PCM or IEEE float")
    try:
        rate, data = wavfile.read(path)
    except (ValueError, OSError) as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc
    if data.size == 0:
        raise EmptyAudio(f"{path}: zero samples")
    if data.dtype == np.uint8:
        x = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype == np.int16:
        x = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        # 24-bit PCM arrives left-justified in int32, so one scale covers both
        x = data.astype(np.float64) / 2147483648.0
    elif np.issubdtype(data.dtype, np.floating):
        x = np.clip(data.astype(np.float64), -1.0, 1.0)
    else:
        raise UnsupportedEncoding(f"{path}: unsupported sample type {data.dtype}")
    if x.ndim == 2:
        x = x.mean(axis=1)
    if rate != target_sample_rate:
        ratio = Fraction(target_sample_rate, rate)
        x = resample_poly(x, ratio.numerator, ratio.denominator)
        x = np.clip(x, -1.0, 1.0)
    return AudioBuffer(x, target_sample_rate)


@lru_cache(maxsize=8)
def _spectral_kernel(params: CqtParams, sample_rate: int):
    lengths = params.window_lengths(sample_rate)
    nfft = 1 << int(math.ceil(math.log2(lengths.max())))
    freqs = params.frequencies()
    half = nfft // 2
    rows, cols, vals = [], [], []
    for k, (f, n_k) in enumerate(zip(freqs, lengths)):
        win = np.hanning(n_k)
        start = half - n_k // 2
        m = np.arange(start, start + n_k)
        temporal = np.zeros(nfft, dtype=np.complex128)
        temporal[m] = win * np.exp(2j * np.pi * f * (m - half) / sample_rate) / win.sum()
        spec = np.fft.fft(temporal)[: half + 1]
        keep = np.flatnonzero(np.abs(spec) >= _KERNEL_THRESHOLD * np.abs(spec).max())
        rows.append(np.full(keep.size, k))
        cols.append(keep)
        vals.append(np.conj(spec[keep]) / nfft)
    kernel = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(params.n_bins, half + 1),
    )
    return kernel, nfft, int(lengths.max())


def compute_cqt(audio: AudioBuffer, params: CqtParams) -> CqtSpectrum:
    """Constant-Q magnitudes, one column per hop, frames centered on ``t * hop``.

    Each bin correlates the signal with a Hann-windowed complex sinusoid of
    ``Q_f`` cycles; the correlation is evaluated per frame in the FFT domain
    against a sparsified spectral kernel.
    """
    params.check_nyquist(audio.sample_rate)
    kernel, nfft, longest = _spectral_kernel(params, audio.sample_rate)
    x = audio.samples
    if x.size < longest:
        raise AudioTooShort(f"{x.size} samples is shorter than the longest window ({longest})")
    n_frames = 1 + x.size // params.hop_length
    padded = np.pad(x, nfft // 2)
    frames = np.lib.stride_tricks.sliding_window_view(padded, nfft)[:: params.hop_length][:n_frames]
    spectra = np.fft.rfft(frames, axis=1)
    coeffs = kernel @ spectra.T
    return CqtSpectrum(np.abs(coeffs), params)


def loudest_frame(spectrum) -> np.ndarray:
    """Column with the largest Euclidean norm; the earliest one wins ties."""
    mags = spectrum.magnitudes if isinstance(spectrum, CqtSpectrum) else np.asarray(spectrum)
    if mags.ndim != 2 or mags.shape[1] < 1:
        raise ValueError("spectrum needs at least one frame")
    norms = np.sqrt((mags * mags).sum(axis=0))
    return mags[:, int(np.argmax(norms))].copy()


def select_octaves(vectors, n_octaves: int, params: CqtParams, file_ids=None) -> FeatureMatrix:
    """Keep the ``n_octaves * Q`` contiguous bins with the largest summed variance.

    The window slides one bin at a time; the lowest offset wins ties.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    total, n = vectors.shape
    width = n_octaves * params.bins_per_octave
    if width > total:
        raise ShapeMismatch(f"cannot select {width} bins from {total}")
    if n < 2:
        raise ShapeMismatch("octave selection needs at least two files")
    var = vectors.var(axis=1)
    csum = np.concatenate([[0.0], np.cumsum(var)])
    window = csum[width:] - csum[:-width]
    best = int(np.argmax(window))
    if not window[best] > 0:
        raise DegenerateVariance("every candidate octave window has zero variance")
    ids = list(file_ids) if file_ids is not None else [str(i) for i in range(n)]
    return FeatureMatrix(vectors[best : best + width].copy(), best, params, ids)


@dataclass
class ManifestEntry:
    path: str
    group: str
    fields: dict = field(default_factory=dict)


def read_manifest(path) -> list[ManifestEntry]:
    """Parse a ``path,group`` CSV; relative paths resolve against the manifest's directory."""
    base = os.path.dirname(os.path.abspath(path))
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "path" not in reader.fieldnames:
                raise DataError(f"{path}: manifest needs a 'path' column")
            rows = list(reader)
    except OSError as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc
    out = []
    for row in rows:
        p = row["path"]
        if not os.path.isabs(p):
            p = os.path.join(base, p)
        out.append(ManifestEntry(p, row.get("group") or "", dict(row)))
    return out


def file_vector(path, params: CqtParams) -> np.ndarray:
    audio = load_audio(path, params.target_sample_rate)
    return loudest_frame(compute_cqt(audio, params))


def loudest_frame_vectors(paths, params: CqtParams, on_error="fail", workers=None):
    """Loudest-frame vectors for every path, stacked as columns in input order.

    Returns ``(stack, kept_paths, warnings)``. With ``on_error="skip"`` files
    that fail to decode or analyse are dropped and reported in ``warnings``.
    """
    paths = list(paths)

    def work(p):
        try:
            return file_vector(p, params)
        except DataError as exc:
            return exc

    if workers and workers > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, paths))
    else:
        results = [work(p) for p in paths]
    columns, kept, warnings = [], [], []
    for p, res in zip(paths, results):
        if isinstance(res, Exception):
            if on_error != "skip":
                res.args = (f"{p}: {res}",)
                raise res
            msg = f"skipped {p}: {res}"
            logger.warning(msg)
            warnings.append(msg)
            continue
        columns.append(res)
        kept.append(p)
    stack = np.stack(columns, axis=1) if columns else np.zeros((params.n_bins, 0))
    return stack, kept, warnings


def build_feature_matrix(manifest, params: CqtParams, n_octaves: int = 3, on_error="fail", workers=None):
    """Feature matrix for a manifest (path to CSV, or a list of paths/entries).

    Returns ``(FeatureMatrix, warnings)``.
    """
    if isinstance(manifest, (str, os.PathLike)):
        manifest = read_manifest(manifest)
    paths = [m.path if isinstance(m, ManifestEntry) else os.fspath(m) for m in manifest]
    if len(paths) < 2:
        raise DataError("a manifest needs at least two audio files")
    stack, kept, warnings = loudest_frame_vectors(paths, params, on_error, workers)
    return select_octaves(stack, n_octaves, params, kept), warnings


def write_features_csv(fm: FeatureMatrix, path):
    """Rows are bins; the first column is the bin center frequency in Hz."""
    freqs = fm.frequencies()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["freq_hz", *fm.file_ids])
        for f, row in zip(freqs, fm.data):
            w.writerow([repr(float(f)), *(repr(float(v)) for v in row)])


def read_features_csv(path, params: CqtParams | None = None) -> FeatureMatrix:
    params = params or CqtParams()
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc
    if len(rows) < 2 or len(rows[0]) < 3:
        raise DataError(f"{path}: features CSV needs a header, bin rows, and at least two file columns")
    try:
        body = np.array([[float(v) for v in r] for r in rows[1:]])
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc
    freqs, data = body[:, 0], body[:, 1:]
    if np.any(data < 0) or not np.all(np.isfinite(data)):
        raise DataError(f"{path}: features must be finite and non-negative")
    offset = int(round(params.bins_per_octave * math.log2(freqs[0] / params.f_min))) if freqs[0] > 0 else 0
    return FeatureMatrix(data, offset, params, rows[0][1:])
