"""Capture-to-feature transforms: IQ planes, amplitude/phase, and spectra.

Every representation maps a length-N complex capture onto a real 2xN
matrix so the same network architecture can consume any of them. The
spectrum path uses an in-package DFT with a radix-2 fast path; arbitrary
lengths fall back to direct evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class Repr(Enum):
    """Feature layouts derivable from one complex capture."""

    IQ = "iq"
    AMP_PHASE = "ap"
    FFT = "fft"


@dataclass
class FeatureVector:
    """A 2xN real feature matrix plus the layout tag it was built with."""

    data: np.ndarray
    repr: Repr


def _bit_reversed_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def _fft_radix2(x: np.ndarray) -> np.ndarray:
    # Iterative decimation-in-time over the last axis; x length is a
    # power of two. Works on arbitrary leading batch dimensions.
    n = x.shape[-1]
    y = x[..., _bit_reversed_indices(n)]
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        y = y.reshape(x.shape[:-1] + (n // size, size))
        even = y[..., :half]
        odd = y[..., half:] * twiddle
        y = np.concatenate((even + odd, even - odd), axis=-1)
        y = y.reshape(x.shape)
        size *= 2
    return y


def _dft_direct(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    k = np.arange(n)
    kernel = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return x @ kernel.T


def dft(r) -> np.ndarray:
    """Unnormalized forward DFT, DC bin first.

    Power-of-two lengths take the radix-2 fast path; any other length is
    evaluated directly. Accepts leading batch dimensions; the transform
    always runs over the last axis.
    """
    r = np.asarray(r, dtype=np.complex128)
    n = r.shape[-1]
    if n == 0:
        raise ValueError("dft input must be non-empty")
    if n & (n - 1) == 0:
        return _fft_radix2(r)
    return _dft_direct(r)


def idft(w) -> np.ndarray:
    """Inverse of dft, normalized by 1/N."""
    w = np.asarray(w, dtype=np.complex128)
    return np.conj(dft(np.conj(w))) / w.shape[-1]


def _as_capture(r) -> np.ndarray:
    r = np.asarray(r)
    if r.ndim != 1 or r.shape[0] == 0:
        raise ValueError(f"capture must be a non-empty 1-D complex vector, got shape {r.shape}")
    return r.astype(np.complex128, copy=False)


def to_iq(r) -> FeatureVector:
    """Stack in-phase and quadrature samples as two real rows."""
    r = _as_capture(r)
    return FeatureVector(np.stack([r.real, r.imag]), Repr.IQ)


def to_amp_phase(r) -> FeatureVector:
    """Row 0: sample magnitudes. Row 1: atan2 phase scaled by 1/pi into [-1, 1]."""
    r = _as_capture(r)
    amp = np.abs(r)
    phase = np.arctan2(r.imag, r.real) / np.pi
    return FeatureVector(np.stack([amp, phase]), Repr.AMP_PHASE)


def to_fft_repr(r) -> FeatureVector:
    """Real and imaginary spectrum rows, DC first, unnormalized."""
    w = dft(_as_capture(r))
    return FeatureVector(np.stack([w.real, w.imag]), Repr.FFT)


def normalize(x: FeatureVector) -> FeatureVector:
    """Scale features to unit RMS without touching phase structure.

    IQ and FFT matrices are scaled as a whole; for AMP_PHASE only the
    amplitude row is scaled and the phase row passes through. All-zero
    inputs are returned unchanged.
    """
    data = np.array(x.data, dtype=np.float64)
    if x.repr is Repr.AMP_PHASE:
        rms = np.sqrt(np.mean(data[0] ** 2))
        if rms > 0.0:
            data[0] = data[0] / rms
    else:
        rms = np.sqrt(np.mean(data**2))
        if rms > 0.0:
            data = data / rms
    return FeatureVector(data, x.repr)


def feature_matrix(captures, repr: Repr, dtype=np.float32) -> np.ndarray:
    """Vectorized transform + per-example normalization for a capture batch.

    captures: complex array of shape (n, N). Returns (n, 1, 2, N) ready for
    the network input layer, one normalized feature plane per capture.
    """
    captures = np.asarray(captures, dtype=np.complex128)
    if captures.ndim != 2:
        raise ValueError(f"expected (n, N) capture batch, got shape {captures.shape}")
    if repr is Repr.IQ:
        data = np.stack([captures.real, captures.imag], axis=1)
        rms = np.sqrt(np.mean(data**2, axis=(1, 2), keepdims=True))
        data = np.divide(data, rms, out=data, where=rms > 0.0)
    elif repr is Repr.AMP_PHASE:
        amp = np.abs(captures)
        phase = np.arctan2(captures.imag, captures.real) / np.pi
        rms = np.sqrt(np.mean(amp**2, axis=1, keepdims=True))
        amp = np.divide(amp, rms, out=amp, where=rms > 0.0)
        data = np.stack([amp, phase], axis=1)
    elif repr is Repr.FFT:
        w = dft(captures)
        data = np.stack([w.real, w.imag], axis=1)
        rms = np.sqrt(np.mean(data**2, axis=(1, 2), keepdims=True))
        data = np.divide(data, rms, out=data, where=rms > 0.0)
    else:
        raise ValueError(f"unknown representation: {repr!r}")
    return data[:, np.newaxis, :, :].astype(dtype)
