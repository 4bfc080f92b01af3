"""Seeded signal synthesis: symbol tables, modems, and technology emulation."""

from .constellations import (
    ANALOG_SCHEMES,
    BITS_PER_SYMBOL,
    CONSTELLATIONS,
    FSK_SCHEMES,
    ModulationScheme,
    UnsupportedSchemeError,
    map_bits_to_symbols,
)
from .modems import (
    modulate_analog,
    modulate_fsk,
    pulse_shape,
    rrc_taps,
    synth_message,
)
from .technology import (
    INTERFERENCE_CLASS_NAMES,
    INTERFERENCE_SAMPLE_RATE,
    TECHNOLOGY_CLASSES,
    Tech,
    TechnologyClass,
    synthesize_technology,
)

__all__ = [
    "ANALOG_SCHEMES",
    "BITS_PER_SYMBOL",
    "CONSTELLATIONS",
    "FSK_SCHEMES",
    "INTERFERENCE_CLASS_NAMES",
    "INTERFERENCE_SAMPLE_RATE",
    "TECHNOLOGY_CLASSES",
    "ModulationScheme",
    "Tech",
    "TechnologyClass",
    "UnsupportedSchemeError",
    "map_bits_to_symbols",
    "modulate_analog",
    "modulate_fsk",
    "pulse_shape",
    "rrc_taps",
    "synth_message",
    "synthesize_technology",
]
