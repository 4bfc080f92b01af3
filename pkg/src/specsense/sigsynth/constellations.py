"""Gray-coded symbol tables for the linear digital schemes.

Each table is indexed by the integer value of a bit group (MSB first) and
is scaled to unit average symbol energy. Square QAM uses independent
per-axis Gray labels, so grid neighbours always differ in a single bit.
"""

from __future__ import annotations

from enum import Enum

import numpy as np


class ModulationScheme(Enum):
    BPSK = "bpsk"
    QPSK = "qpsk"
    PSK8 = "8psk"
    QAM16 = "qam16"
    QAM64 = "qam64"
    CPFSK = "cpfsk"
    GFSK = "gfsk"
    PAM4 = "pam4"
    WBFM = "wbfm"
    AM_DSB = "am-dsb"
    AM_SSB = "am-ssb"


FSK_SCHEMES = frozenset({ModulationScheme.CPFSK, ModulationScheme.GFSK})
ANALOG_SCHEMES = frozenset(
    {ModulationScheme.WBFM, ModulationScheme.AM_DSB, ModulationScheme.AM_SSB}
)


class UnsupportedSchemeError(ValueError):
    """Raised when an operation gets a scheme outside its family."""


def _gray(k: int) -> int:
    return k ^ (k >> 1)


def _gray_axis_levels(bits: int) -> np.ndarray:
    """Level for each bit word of one amplitude axis, Gray ordered.

    Word w sits at grid position k where gray(k) == w, giving the classic
    00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3 progression for two bits.
    """
    m = 1 << bits
    levels = np.zeros(m)
    for k in range(m):
        levels[_gray(k)] = 2 * k - (m - 1)
    return levels


def _psk_table(bits: int) -> np.ndarray:
    m = 1 << bits
    table = np.zeros(m, dtype=np.complex128)
    for k in range(m):
        table[_gray(k)] = np.exp(2j * np.pi * k / m)
    return table


def _qam_table(bits_per_axis: int) -> np.ndarray:
    levels = _gray_axis_levels(bits_per_axis)
    m_axis = levels.shape[0]
    table = np.zeros(m_axis * m_axis, dtype=np.complex128)
    for wi in range(m_axis):
        for wq in range(m_axis):
            table[(wi << bits_per_axis) | wq] = levels[wi] + 1j * levels[wq]
    return table / np.sqrt(np.mean(np.abs(table) ** 2))


def _pam_table(bits: int) -> np.ndarray:
    levels = _gray_axis_levels(bits).astype(np.complex128)
    return levels / np.sqrt(np.mean(np.abs(levels) ** 2))


CONSTELLATIONS: dict[ModulationScheme, np.ndarray] = {
    ModulationScheme.BPSK: np.array([1.0 + 0.0j, -1.0 + 0.0j]),
    ModulationScheme.QPSK: np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0),
    ModulationScheme.PSK8: _psk_table(3),
    ModulationScheme.QAM16: _qam_table(2),
    ModulationScheme.QAM64: _qam_table(3),
    ModulationScheme.PAM4: _pam_table(2),
}

BITS_PER_SYMBOL: dict[ModulationScheme, int] = {
    scheme: int(np.log2(len(table))) for scheme, table in CONSTELLATIONS.items()
}


def map_bits_to_symbols(bits, scheme: ModulationScheme) -> np.ndarray:
    """Group bits MSB-first and look up the scheme's constellation points.

    The bit count must be a multiple of the scheme's bits per symbol, and
    the scheme must be one of the linear digital tables.
    """
    if scheme not in CONSTELLATIONS:
        raise UnsupportedSchemeError(f"{scheme.value} has no linear symbol table")
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim != 1 or not np.all((bits == 0) | (bits == 1)):
        raise ValueError("bits must be a flat 0/1 sequence")
    k = BITS_PER_SYMBOL[scheme]
    if bits.shape[0] % k != 0:
        raise ValueError(f"bit count {bits.shape[0]} is not a multiple of {k}")
    words = bits.reshape(-1, k) @ (1 << np.arange(k - 1, -1, -1))
    return CONSTELLATIONS[scheme][words]
