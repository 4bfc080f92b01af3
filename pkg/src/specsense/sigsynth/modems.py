"""Baseband waveform construction: pulse shaping, FSK, and analog modulation."""

from __future__ import annotations

import numpy as np

from .constellations import FSK_SCHEMES, ModulationScheme, UnsupportedSchemeError


def rrc_taps(sps: int, rolloff: float, span: int) -> np.ndarray:
    """Root-raised-cosine filter, span*sps+1 taps, normalized to unit energy.

    The two removable singularities (t = 0 and |t| = 1/(4*rolloff) symbol
    times) use their limit values.
    """
    beta = float(rolloff)
    n = span * sps
    t = np.arange(-n // 2, n // 2 + 1) / sps
    taps = np.zeros(t.shape[0])
    for i, ti in enumerate(t):
        if abs(ti) < 1e-12:
            taps[i] = 1.0 + beta * (4.0 / np.pi - 1.0)
        elif beta > 0.0 and abs(abs(ti) - 1.0 / (4.0 * beta)) < 1e-12:
            taps[i] = (beta / np.sqrt(2.0)) * (
                (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * beta))
                + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * beta))
            )
        else:
            num = np.sin(np.pi * ti * (1.0 - beta)) + 4.0 * beta * ti * np.cos(
                np.pi * ti * (1.0 + beta)
            )
            den = np.pi * ti * (1.0 - (4.0 * beta * ti) ** 2)
            taps[i] = num / den
    return taps / np.sqrt(np.sum(taps**2))


def pulse_shape(symbols, sps: int, rolloff: float = 0.35, span: int = 8) -> np.ndarray:
    """Upsample symbols by sps and apply the RRC filter.

    Output length is len(symbols)*sps; the filter group delay is trimmed
    symmetrically so sample k*sps lines up with symbol k.
    """
    if sps < 2:
        raise ValueError(f"sps must be >= 2, got {sps}")
    if span < 4:
        raise ValueError(f"span must be >= 4, got {span}")
    if not 0.0 < rolloff < 1.0:
        raise ValueError(f"rolloff must be in (0, 1), got {rolloff}")
    symbols = np.asarray(symbols, dtype=np.complex128)
    if symbols.ndim != 1 or symbols.shape[0] == 0:
        raise ValueError("symbols must be a non-empty 1-D sequence")
    upsampled = np.zeros(symbols.shape[0] * sps, dtype=np.complex128)
    upsampled[::sps] = symbols
    taps = rrc_taps(sps, rolloff, span)
    delay = span * sps // 2
    full = np.convolve(upsampled, taps)
    return full[delay : delay + upsampled.shape[0]]


def _gaussian_pulse_taps(sps: int, bt: float) -> np.ndarray:
    """Gaussian smoothing kernel spanning +/-2 symbols, unit sum."""
    sigma = np.sqrt(np.log(2.0)) / (2.0 * np.pi * bt) * sps
    t = np.arange(-2 * sps, 2 * sps + 1)
    taps = np.exp(-0.5 * (t / sigma) ** 2)
    return taps / taps.sum()


def modulate_fsk(
    bits,
    scheme: ModulationScheme,
    sps: int,
    mod_index: float = 0.5,
    bt: float = 0.3,
) -> np.ndarray:
    """Binary continuous-phase FSK with unit envelope.

    Each bit contributes a phase excursion of +/- pi*mod_index spread over
    one symbol. GFSK first smooths the NRZ frequency pulse with a Gaussian
    of bandwidth-time product bt; CPFSK keeps the rectangular pulse.
    """
    if scheme not in FSK_SCHEMES:
        raise UnsupportedSchemeError(f"{scheme.value} is not an FSK scheme")
    if sps < 2:
        raise ValueError(f"sps must be >= 2, got {sps}")
    if mod_index <= 0.0:
        raise ValueError(f"mod_index must be positive, got {mod_index}")
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim != 1 or bits.shape[0] == 0 or not np.all((bits == 0) | (bits == 1)):
        raise ValueError("bits must be a non-empty flat 0/1 sequence")
    nrz = np.repeat(2.0 * bits - 1.0, sps)
    if scheme is ModulationScheme.GFSK:
        if bt <= 0.0:
            raise ValueError(f"bt must be positive, got {bt}")
        kernel = _gaussian_pulse_taps(sps, bt)
        nrz = np.convolve(nrz, kernel, mode="same")
    increments = np.pi * mod_index * nrz / sps
    return np.exp(1j * np.cumsum(increments))


def synth_message(rng, n: int, fs: float) -> np.ndarray:
    """Multi-tone stand-in for program audio, peak-normalized to <= 1.

    Sums 3-5 sinusoids between 0.3 and 5 kHz, then silences up to 30% of
    the span in one or two contiguous gaps. The gaps are what make
    carrier-only stretches of the analog schemes look alike.
    """
    rng = np.random.default_rng(rng)
    t = np.arange(n) / fs
    msg = np.zeros(n)
    for _ in range(int(rng.integers(3, 6))):
        freq = rng.uniform(300.0, 5000.0)
        amp = rng.uniform(0.2, 1.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        msg += amp * np.sin(2.0 * np.pi * freq * t + phase)
    silence = rng.uniform(0.0, 0.3)
    if silence > 0.0:
        remaining = int(round(silence * n))
        for _ in range(int(rng.integers(1, 3))):
            if remaining <= 0:
                break
            width = int(rng.integers(1, remaining + 1))
            start = int(rng.integers(0, max(n - width, 0) + 1))
            msg[start : start + width] = 0.0
            remaining -= width
    peak = np.max(np.abs(msg))
    if peak > 0.0:
        msg = msg / peak
    return msg


def _hilbert_analytic(message: np.ndarray) -> np.ndarray:
    """Analytic signal via one-sided spectrum doubling."""
    n = message.shape[0]
    spectrum = np.fft.fft(message)
    gain = np.zeros(n)
    gain[0] = 1.0
    if n % 2 == 0:
        gain[n // 2] = 1.0
        gain[1 : n // 2] = 2.0
    else:
        gain[1 : (n + 1) // 2] = 2.0
    return np.fft.ifft(spectrum * gain)


def modulate_analog(
    scheme: ModulationScheme,
    message,
    fs: float,
    mod_index: float = 0.8,
    freq_dev_hz: float = 75e3,
) -> np.ndarray:
    """Analog complex envelopes: wideband FM, DSB AM, and SSB AM.

    The message must be real with peak magnitude <= 1. WBFM integrates the
    message into phase with deviation freq_dev_hz; AM-DSB rides a unit
    carrier with depth mod_index; AM-SSB keeps the upper sideband of the
    analytic message and suppresses the carrier.
    """
    message = np.asarray(message, dtype=np.float64)
    if message.ndim != 1 or message.shape[0] == 0:
        raise ValueError("message must be a non-empty real sequence")
    if np.max(np.abs(message)) > 1.0 + 1e-9:
        raise ValueError("message peak exceeds 1; normalize before modulating")
    if scheme is ModulationScheme.WBFM:
        phase = 2.0 * np.pi * freq_dev_hz * np.cumsum(message) / fs
        return np.exp(1j * phase)
    if scheme is ModulationScheme.AM_DSB:
        return (1.0 + mod_index * message).astype(np.complex128)
    if scheme is ModulationScheme.AM_SSB:
        return _hilbert_analytic(message)
    raise UnsupportedSchemeError(f"{scheme.value} is not an analog scheme")
