"""Color space conversion (sRGB to CIELAB, D65) and the CIEDE2000 difference."""

from __future__ import annotations

import math
from typing import Sequence

# sRGB (IEC 61966-2-1) to XYZ, D65 white point, 2 degree observer.
_SRGB_TO_XYZ = (
    (0.4124, 0.3576, 0.1805),
    (0.2126, 0.7152, 0.0722),
    (0.0193, 0.1192, 0.9505),
)
_WHITE_D65 = (0.95047, 1.0, 1.08883)


def _srgb_to_linear(c: float) -> float:
    c = c / 255.0
    if c <= 0.04045:
        return c / 12.92
    return ((c + 0.055) / 1.055) ** 2.4


def _lab_f(t: float) -> float:
    # CIE cube-root with the linear toe below (6/29)^3
    if t > 216.0 / 24389.0:
        return t ** (1.0 / 3.0)
    return (24389.0 / 27.0 * t + 16.0) / 116.0


def srgb_to_lab(rgb: Sequence[float]) -> tuple[float, float, float]:
    """Convert an 8-bit sRGB triple (values in [0, 255]) to CIELAB (L*, a*, b*)."""
    r, g, b = (_srgb_to_linear(c) for c in rgb)
    x = _SRGB_TO_XYZ[0][0] * r + _SRGB_TO_XYZ[0][1] * g + _SRGB_TO_XYZ[0][2] * b
    y = _SRGB_TO_XYZ[1][0] * r + _SRGB_TO_XYZ[1][1] * g + _SRGB_TO_XYZ[1][2] * b
    z = _SRGB_TO_XYZ[2][0] * r + _SRGB_TO_XYZ[2][1] * g + _SRGB_TO_XYZ[2][2] * b
    fx = _lab_f(x / _WHITE_D65[0])
    fy = _lab_f(y / _WHITE_D65[1])
    fz = _lab_f(z / _WHITE_D65[2])
    return (116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))


def delta_e_2000(
    lab1: Sequence[float],
    lab2: Sequence[float],
    kl: float = 1.0,
    kc: float = 1.0,
    kh: float = 1.0,
) -> float:
    """CIEDE2000 color difference between two CIELAB triples.

    Full formula, including the chroma-dependent a* rescaling and the
    hue-rotation term; parametric factors default to 1.
    """
    l1, a1, b1 = lab1
    l2, a2, b2 = lab2

    c1 = math.hypot(a1, b1)
    c2 = math.hypot(a2, b2)
    c_mean = (c1 + c2) / 2.0
    pow25_7 = 25.0 ** 7
    g = 0.5 * (1.0 - math.sqrt(c_mean ** 7 / (c_mean ** 7 + pow25_7)))

    a1p = (1.0 + g) * a1
    a2p = (1.0 + g) * a2
    c1p = math.hypot(a1p, b1)
    c2p = math.hypot(a2p, b2)

    def hue_angle(ap: float, bp: float) -> float:
        if ap == 0.0 and bp == 0.0:
            return 0.0
        h = math.degrees(math.atan2(bp, ap))
        return h + 360.0 if h < 0.0 else h

    h1p = hue_angle(a1p, b1)
    h2p = hue_angle(a2p, b2)

    dlp = l2 - l1
    dcp = c2p - c1p

    if c1p * c2p == 0.0:
        dhp_angle = 0.0
    else:
        dhp_angle = h2p - h1p
        if dhp_angle > 180.0:
            dhp_angle -= 360.0
        elif dhp_angle < -180.0:
            dhp_angle += 360.0
    dhp = 2.0 * math.sqrt(c1p * c2p) * math.sin(math.radians(dhp_angle) / 2.0)

    lp_mean = (l1 + l2) / 2.0
    cp_mean = (c1p + c2p) / 2.0

    if c1p * c2p == 0.0:
        hp_mean = h1p + h2p
    elif abs(h1p - h2p) <= 180.0:
        hp_mean = (h1p + h2p) / 2.0
    elif h1p + h2p < 360.0:
        hp_mean = (h1p + h2p) / 2.0 + 180.0
    else:
        hp_mean = (h1p + h2p) / 2.0 - 180.0

    t = (
        1.0
        - 0.17 * math.cos(math.radians(hp_mean - 30.0))
        + 0.24 * math.cos(math.radians(2.0 * hp_mean))
        + 0.32 * math.cos(math.radians(3.0 * hp_mean + 6.0))
        - 0.20 * math.cos(math.radians(4.0 * hp_mean - 63.0))
    )

    d_theta = 30.0 * math.exp(-(((hp_mean - 275.0) / 25.0) ** 2))
    rc = 2.0 * math.sqrt(cp_mean ** 7 / (cp_mean ** 7 + pow25_7))
    rt = -math.sin(math.radians(2.0 * d_theta)) * rc

    lm = (lp_mean - 50.0) ** 2
    sl = 1.0 + 0.015 * lm / math.sqrt(20.0 + lm)
    sc = 1.0 + 0.045 * cp_mean
    sh = 1.0 + 0.015 * cp_mean * t

    fl = dlp / (kl * sl)
    fc = dcp / (kc * sc)
    fh = dhp / (kh * sh)
    return math.sqrt(fl * fl + fc * fc + fh * fh + rt * fc * fh)
