"""Regenerates the 64x64 segmentation test card and its golden mask.

The card sweeps hue across columns and steps saturation and value down the
rows, so every threshold boundary is crossed. The golden mask is computed
here in exact rational arithmetic, independently of the C++ code.

    python3 make_test_card.py   # writes test_card.png, test_card_mask.png
"""

import colorsys
from fractions import Fraction
from pathlib import Path

from PIL import Image

SIZE = 64
TAU1, TAU2, TAU3, TAU4 = 30, 79, 30, 163


def round_half_up(x: Fraction) -> int:
    return int((2 * x.numerator + x.denominator) // (2 * x.denominator))


def hsv8(r: int, g: int, b: int) -> tuple[int, int, int]:
    """8-bit HSV: hue in half degrees [0, 180), s and v in [0, 255]."""
    vmax, vmin = max(r, g, b), min(r, g, b)
    d = vmax - vmin
    if vmax == 0 or d == 0:
        return 0, 0, vmax
    s = round_half_up(Fraction(255 * d, vmax))
    if vmax == r:
        deg = Fraction(60 * (g - b), d)
    elif vmax == g:
        deg = 120 + Fraction(60 * (b - r), d)
    else:
        deg = 240 + Fraction(60 * (r - g), d)
    deg %= 360
    h = round_half_up(deg / 2) % 180
    return h, s, vmax


def card() -> Image.Image:
    img = Image.new("RGB", (SIZE, SIZE))
    px = img.load()
    for i in range(SIZE):
        for j in range(SIZE):
            h = j / SIZE  # full hue circle across the columns
            s = ((i % 8) + 0.5) / 8  # saturation cycles every 8 rows
            v = 0.25 + 0.75 * (i // 8) / 7  # value steps every 8 rows
            r, g, b = colorsys.hsv_to_rgb(h, s, v)
            px[j, i] = tuple(int(round(255 * c)) for c in (r, g, b))
    # A few achromatic and saturated corner cases along the top-left.
    for j, rgb in enumerate([(0, 0, 0), (255, 255, 255), (0, 255, 0), (128, 128, 128)]):
        px[j, 0] = rgb
    return img


def golden(img: Image.Image) -> Image.Image:
    mask = Image.new("L", img.size)
    src, dst = img.load(), mask.load()
    for i in range(SIZE):
        for j in range(SIZE):
            h, s, v = hsv8(*src[j, i])
            leaf = TAU1 <= h <= TAU2 and (s >= TAU3 or v >= TAU4)
            dst[j, i] = 255 if leaf else 0
    return mask


if __name__ == "__main__":
    here = Path(__file__).resolve().parent
    img = card()
    img.save(here / "test_card.png")
    golden(img).save(here / "test_card_mask.png")
