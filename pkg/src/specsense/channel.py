"""Impairment chain applied between synthesis and capture.

Stages mirror what a cheap receiver in a cluttered band would see:
multipath fading, carrier frequency offset, oscillator phase noise,
sample-clock drift, and additive noise. Noise always comes last so the
labeled SNR refers to the fully impaired signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Profile(Enum):
    """RICH runs every stage; FLAT is a single complex tap plus noise."""

    RICH = "rich"
    FLAT = "flat"


# Declared draw ranges for the random per-example channel.
CFO_MAX_HZ = 500.0
PHASE_NOISE_STD_MAX = 0.005  # radians per sample step
CLOCK_SKEW_MAX_PPM = 50.0
MAX_PATHS = 4
MAX_DELAY_SAMPLES = 3.0
DELAY_POWER_DECAY = 0.5


@dataclass
class ChannelParams:
    """One draw of the impairment chain.

    taps holds (complex gain, delay in samples) pairs; the first delay must
    be zero so the capture keeps its alignment. snr_db may be math.inf as
    the explicit no-noise sentinel.
    """

    snr_db: float
    fs: float
    taps: list = field(default_factory=lambda: [(1.0 + 0.0j, 0.0)])
    cfo_hz: float = 0.0
    phase_noise_std: float = 0.0
    clock_skew_ppm: float = 0.0
    profile: Profile = Profile.RICH

    def __post_init__(self):
        if not (self.snr_db == math.inf or -20.0 <= self.snr_db <= 20.0):
            raise ValueError(f"snr_db must be in [-20, 20] or +inf, got {self.snr_db}")
        if self.fs <= 0.0:
            raise ValueError(f"fs must be positive, got {self.fs}")
        if not self.taps:
            raise ValueError("taps must hold at least one path")
        if abs(self.taps[0][1]) > 1e-12:
            raise ValueError("first tap delay must be zero")
        for _, delay in self.taps:
            if delay < 0.0:
                raise ValueError("tap delays must be non-negative")
        if self.phase_noise_std < 0.0:
            raise ValueError("phase_noise_std must be non-negative")


def apply_fading(x, taps) -> np.ndarray:
    """Sum delayed, scaled copies; fractional delays are linearly interpolated.

    Samples before the capture start are treated as zero, so output length
    equals input length.
    """
    x = np.asarray(x, dtype=np.complex128)
    out = np.zeros_like(x)
    n = x.shape[0]
    for gain, delay in taps:
        base = int(np.floor(delay))
        frac = delay - base
        shifted = np.zeros(n, dtype=np.complex128)
        if base < n:
            shifted[base:] = x[: n - base]
        if frac > 0.0 and base + 1 < n:
            older = np.zeros(n, dtype=np.complex128)
            older[base + 1 :] = x[: n - base - 1]
            shifted = (1.0 - frac) * shifted + frac * older
        elif frac > 0.0:
            shifted = (1.0 - frac) * shifted
        out += gain * shifted
    return out


def apply_cfo(x, cfo_hz: float, fs: float) -> np.ndarray:
    """Rotate by a constant frequency offset; magnitudes are untouched."""
    x = np.asarray(x, dtype=np.complex128)
    n = np.arange(x.shape[0])
    return x * np.exp(2j * np.pi * cfo_hz * n / fs)


def apply_phase_noise(x, std: float, seed) -> np.ndarray:
    """Multiply by a zero-start Wiener phase walk with the given step std."""
    x = np.asarray(x, dtype=np.complex128)
    if std < 0.0:
        raise ValueError(f"std must be non-negative, got {std}")
    if std == 0.0:
        return x.copy()
    rng = np.random.default_rng(seed)
    steps = rng.normal(0.0, std, x.shape[0])
    steps[0] = 0.0
    return x * np.exp(1j * np.cumsum(steps))


def apply_timing_drift(x, skew_ppm: float, seed, frac_offset: float | None = None) -> np.ndarray:
    """Resample at a slightly wrong clock via linear interpolation.

    Read positions advance by (1 + skew_ppm * 1e-6) per output sample from
    a random initial fractional offset in [0, 1); positions past the end
    hold the final sample. Output length equals input length.
    """
    x = np.asarray(x, dtype=np.complex128)
    if frac_offset is None:
        frac_offset = float(np.random.default_rng(seed).uniform(0.0, 1.0))
    if not 0.0 <= frac_offset < 1.0:
        raise ValueError(f"frac_offset must be in [0, 1), got {frac_offset}")
    n = x.shape[0]
    positions = frac_offset + np.arange(n) * (1.0 + skew_ppm * 1e-6)
    grid = np.arange(n, dtype=np.float64)
    return np.interp(positions, grid, x.real) + 1j * np.interp(positions, grid, x.imag)


def apply_awgn(x, snr_db: float, seed) -> np.ndarray:
    """Add circular complex Gaussian noise at an exact measured SNR.

    The drawn noise vector is rescaled so its realized power equals
    signal_power * 10**(-snr_db/10), which keeps the label honest even for
    a short segment. snr_db = +inf is the no-noise sentinel.
    """
    x = np.asarray(x, dtype=np.complex128)
    if snr_db == math.inf:
        return x.copy()
    signal_power = np.mean(np.abs(x) ** 2)
    if signal_power == 0.0:
        raise ValueError("cannot set an SNR on an all-zero signal")
    rng = np.random.default_rng(seed)
    noise = rng.normal(size=x.shape[0]) + 1j * rng.normal(size=x.shape[0])
    target_power = signal_power * 10.0 ** (-snr_db / 10.0)
    noise *= np.sqrt(target_power / np.mean(np.abs(noise) ** 2))
    return x + noise


def channel_pipeline(x, params: ChannelParams, seed) -> np.ndarray:
    """Run the stages the profile asks for, noise last.

    RICH: fading -> CFO -> phase noise -> timing drift -> AWGN.
    FLAT: single-tap fading -> AWGN.
    """
    rng = np.random.default_rng(seed)
    y = apply_fading(x, params.taps)
    if params.profile is Profile.RICH:
        y = apply_cfo(y, params.cfo_hz, params.fs)
        y = apply_phase_noise(y, params.phase_noise_std, rng)
        y = apply_timing_drift(y, params.clock_skew_ppm, rng)
    return apply_awgn(y, params.snr_db, rng)


def draw_rich_params(snr_db: float, fs: float, seed) -> ChannelParams:
    """Random multipath/CFO/phase/drift draw for the modulation task.

    Path count is 1-4 with Rayleigh gains on an exponential power-delay
    profile (factor 0.5 per tap, total power 1) and delays up to 3 samples.
    """
    rng = np.random.default_rng(seed)
    n_paths = int(rng.integers(1, MAX_PATHS + 1))
    powers = DELAY_POWER_DECAY ** np.arange(n_paths)
    powers = powers / powers.sum()
    taps = []
    for i in range(n_paths):
        gain = np.sqrt(powers[i] / 2.0) * (rng.normal() + 1j * rng.normal())
        delay = 0.0 if i == 0 else float(rng.uniform(0.0, MAX_DELAY_SAMPLES))
        taps.append((gain, delay))
    return ChannelParams(
        snr_db=snr_db,
        fs=fs,
        taps=taps,
        cfo_hz=float(rng.uniform(-CFO_MAX_HZ, CFO_MAX_HZ)),
        phase_noise_std=float(rng.uniform(0.0, PHASE_NOISE_STD_MAX)),
        clock_skew_ppm=float(rng.uniform(-CLOCK_SKEW_MAX_PPM, CLOCK_SKEW_MAX_PPM)),
        profile=Profile.RICH,
    )


def draw_flat_params(snr_db: float, fs: float, seed) -> ChannelParams:
    """Single Rayleigh tap plus noise, used for the interference task."""
    rng = np.random.default_rng(seed)
    gain = (rng.normal() + 1j * rng.normal()) / np.sqrt(2.0)
    return ChannelParams(
        snr_db=snr_db,
        fs=fs,
        taps=[(gain, 0.0)],
        profile=Profile.FLAT,
    )
