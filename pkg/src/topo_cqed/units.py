"""Unit conventions.

Angular frequencies are stored in rad/us and times in us. Users quote
frequencies in linear MHz or GHz; multiply by ``MHZ`` / ``GHZ`` to convert.
"""

import math

TWO_PI = 2.0 * math.pi

#: 1 MHz expressed as an angular frequency in rad/us.
MHZ = TWO_PI
#: 1 GHz expressed as an angular frequency in rad/us.
GHZ = 1000.0 * TWO_PI
#: 1 kHz expressed as an angular frequency in rad/us.
KHZ = TWO_PI / 1000.0


def mhz(value):
    """Linear MHz -> rad/us."""
    return value * MHZ


def ghz(value):
    """Linear GHz -> rad/us."""
    return value * GHZ


def to_mhz(omega):
    """rad/us -> linear MHz."""
    return omega / MHZ
