"""Technology emulation for the interference task, sampled at 10 MS/s.

Fifteen classes come from the (technology, channel) product below. Each
class produces its characteristic occupied bandwidth at a fixed center
offset inside the capture window:

    wifi    3 channels, wide Barker-chipped DSSS, offsets -1/0/+1 MHz
    zigbee  4 channels, offset-QPSK chips at 2 Mchip/s, offsets +/-1, +/-3 MHz
    bt      8 channels, 1 MHz GFSK hops, offsets +/-0.5 ... +/-3.5 MHz
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .modems import ModulationScheme, modulate_fsk, pulse_shape

INTERFERENCE_SAMPLE_RATE = 10e6

BARKER11 = np.array([1, -1, 1, 1, -1, 1, 1, 1, -1, -1, -1], dtype=np.float64)


class Tech(Enum):
    WIFI = "wifi"
    ZIGBEE = "zigbee"
    BLUETOOTH = "bt"


@dataclass(frozen=True)
class TechnologyClass:
    tech: Tech
    channel_index: int
    offset_hz: float

    @property
    def name(self) -> str:
        return f"{self.tech.value}_ch{self.channel_index}"


def _build_class_table() -> tuple[TechnologyClass, ...]:
    table = []
    for i, off in enumerate((-1e6, 0.0, 1e6)):
        table.append(TechnologyClass(Tech.WIFI, i, off))
    for i, off in enumerate((-3e6, -1e6, 1e6, 3e6)):
        table.append(TechnologyClass(Tech.ZIGBEE, i, off))
    for i, off in enumerate((-3.5e6, -2.5e6, -1.5e6, -0.5e6, 0.5e6, 1.5e6, 2.5e6, 3.5e6)):
        table.append(TechnologyClass(Tech.BLUETOOTH, i, off))
    return tuple(table)


TECHNOLOGY_CLASSES: tuple[TechnologyClass, ...] = _build_class_table()
INTERFERENCE_CLASS_NAMES: tuple[str, ...] = tuple(c.name for c in TECHNOLOGY_CLASSES)


def _wifi_baseband(rng, duration: int) -> np.ndarray:
    # Barker-11 chipped BPSK at 5 Mchip/s held for 2 samples per chip:
    # the sinc-shaped spectrum spans most of the 10 MHz window.
    sps = 2
    n_bits = duration // (len(BARKER11) * sps) + 2
    bits = 2.0 * rng.integers(0, 2, n_bits) - 1.0
    chips = (bits[:, np.newaxis] * BARKER11).ravel()
    return np.repeat(chips, sps).astype(np.complex128)[:duration]


def _zigbee_baseband(rng, duration: int) -> np.ndarray:
    # Both quadrature arms carry independent 2 Mchip/s streams with RRC
    # shaping, the quadrature arm lagging half a chip.
    sps = 5
    n_chips = duration // sps + 8 + 2
    ci = 2.0 * rng.integers(0, 2, n_chips) - 1.0
    cq = 2.0 * rng.integers(0, 2, n_chips) - 1.0
    i_arm = pulse_shape(ci.astype(np.complex128), sps).real
    q_arm = pulse_shape(cq.astype(np.complex128), sps).real
    lag = sps // 2
    q_arm = np.concatenate([np.zeros(lag), q_arm[:-lag]])
    return (i_arm + 1j * q_arm)[:duration]


def _bluetooth_baseband(rng, duration: int) -> np.ndarray:
    # 1 Msym/s GFSK (bt 0.5, modulation index 0.32) occupying about 1 MHz.
    sps = 10
    n_bits = duration // sps + 4
    bits = rng.integers(0, 2, n_bits)
    return modulate_fsk(bits, ModulationScheme.GFSK, sps, mod_index=0.32, bt=0.5)[:duration]


_BASEBAND = {
    Tech.WIFI: _wifi_baseband,
    Tech.ZIGBEE: _zigbee_baseband,
    Tech.BLUETOOTH: _bluetooth_baseband,
}


def synthesize_technology(cls: TechnologyClass, duration_samples: int, seed) -> np.ndarray:
    """Emit duration_samples of the class's waveform at its channel offset."""
    if not isinstance(cls, TechnologyClass) or cls.tech not in _BASEBAND:
        raise ValueError(f"unknown technology class: {cls!r}")
    if duration_samples < 1:
        raise ValueError(f"duration must be positive, got {duration_samples}")
    rng = np.random.default_rng(seed)
    baseband = _BASEBAND[cls.tech](rng, duration_samples)
    if baseband.shape[0] < duration_samples:
        raise AssertionError("baseband builder under-produced samples")
    n = np.arange(duration_samples)
    shift = np.exp(2j * np.pi * cls.offset_hz * n / INTERFERENCE_SAMPLE_RATE)
    return baseband[:duration_samples] * shift
