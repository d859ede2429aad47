"""Stand-in for the external renderer: deterministic outputs from HTML alone.

Usage: stub_renderer.py HTML_PATH PNG_PATH GEOMETRY_PATH [--fail] [--no-geometry]

The screenshot's pixels are a hash-stream of the HTML text, so identical
inputs yield identical artifacts. The geometry dump lists every href/src
found in the source at synthetic, index-derived positions.
"""

from __future__ import annotations

import hashlib
import json
import re
import sys

WIDTH, HEIGHT = 320, 240


def hash_pixels(text: str) -> bytes:
    need = WIDTH * HEIGHT * 3
    out = bytearray()
    counter = 0
    while len(out) < need:
        out.extend(hashlib.sha256(f"{counter}:{text}".encode("utf-8")).digest())
        counter += 1
    return bytes(out[:need])


def main() -> int:
    args = [a for a in sys.argv[1:] if not a.startswith("--")]
    flags = {a for a in sys.argv[1:] if a.startswith("--")}
    html_path, png_path, geometry_path = args

    if "--fail" in flags:
        sys.stderr.write("stub renderer: forced failure\n")
        return 1

    text = open(html_path, encoding="utf-8").read()

    import numpy as np
    from PIL import Image

    pixels = np.frombuffer(hash_pixels(text), dtype=np.uint8).reshape(HEIGHT, WIDTH, 3)
    Image.fromarray(pixels, mode="RGB").save(png_path, format="PNG")

    if "--no-geometry" in flags:
        return 0

    elements = []
    index = 0
    for match in re.finditer(r'<a\s[^>]*href="([^"]+)"[^>]*>([^<]*)', text):
        y = 10 + 30 * index
        elements.append(
            {
                "tag": "a",
                "box": [[10, y], [150, y + 20]],
                "visible": True,
                "href": match.group(1),
                "text": match.group(2).strip(),
            }
        )
        index += 1
    for match in re.finditer(r'<img\s[^>]*src="([^"]+)"', text):
        y = 10 + 30 * index
        elements.append(
            {
                "tag": "img",
                "box": [[170, y], [300, y + 25]],
                "visible": True,
                "src": match.group(1),
            }
        )
        index += 1

    dump = {
        "origin": "file://rendered/",
        "viewport": {"width": WIDTH, "height": HEIGHT},
        "elements": elements,
    }
    with open(geometry_path, "w", encoding="utf-8") as handle:
        json.dump(dump, handle, indent=2)
        handle.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
