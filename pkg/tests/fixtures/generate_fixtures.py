"""Regenerate the bundled page fixtures and HTML corpus.

Deterministic by construction; run from the repository root:

    python tests/fixtures/generate_fixtures.py

The three synthetic pages carry a screenshot, a geometry dump, the resource
list extracted from that dump, and a small HTML source. The corpus documents
exercise the simplifier: comments, scripts, hidden subtrees, head metadata,
malformed markup, entities, and raw-text elements.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "src"))

from mrweb.htmlpipe import extract_resources, parse_geometry_dump
from mrweb.raster import RasterImage
from mrweb.resources import serialize_resource_list

FIXTURES = Path(__file__).resolve().parent


def _canvas(width: int, height: int, rgb: tuple[int, int, int]) -> np.ndarray:
    canvas = np.zeros((height, width, 3), dtype=np.uint8)
    canvas[:, :] = rgb
    return canvas


def _fill(canvas: np.ndarray, box: tuple[int, int, int, int], rgb: tuple[int, int, int]) -> None:
    x1, y1, x2, y2 = box
    canvas[y1:y2, x1:x2] = rgb


def _element(tag, box, visible=True, **extra):
    (x1, y1), (x2, y2) = box
    item = {"tag": tag, "box": [[x1, y1], [x2, y2]], "visible": visible}
    item.update(extra)
    return item


PAGES = {
    "alpha": {
        "size": (200, 150),
        "background": (250, 250, 248),
        "regions": [
            ((0, 0, 200, 30), (28, 40, 110)),     # header band
            ((10, 40, 60, 90), (200, 30, 30)),    # logo image
            ((80, 45, 150, 60), (30, 140, 60)),   # About link
            ((80, 70, 150, 85), (140, 90, 180)),  # Partner link
        ],
        "origin": "https://alpha.example/",
        "elements": [
            _element("img", ((10, 40), (60, 90)), src="/logo.png"),
            _element("a", ((80, 45), (150, 60)), href="/about", text="About us"),
            _element(
                "a", ((80, 70), (150, 85)), href="https://partner.example/x", text="Partner"
            ),
        ],
        "html": """<!DOCTYPE html><html><head><meta charset="utf-8"><title>Alpha</title></head>
<body>
<header style="background:#1c286e;height:30px"></header>
<img src="/logo.png" alt="logo">
<a href="/about">About us</a>
<a href="https://partner.example/x">Partner</a>
</body></html>
""",
    },
    "beta": {
        "size": (240, 180),
        "background": (245, 240, 235),
        "regions": [
            ((0, 0, 240, 26), (60, 60, 60)),
            ((12, 40, 110, 120), (240, 170, 40)),  # hero background image
            ((130, 50, 220, 66), (20, 90, 160)),   # send link
            ((130, 76, 220, 92), (90, 20, 120)),   # docs link
        ],
        "origin": "https://beta.example/",
        "elements": [
            _element(
                "div", ((12, 40), (110, 120)), backgroundImage="/hero.jpg"
            ),
            _element(
                "a", ((130, 50), (220, 66)), href="/api/send", text="Send message"
            ),
            _element("a", ((130, 76), (220, 92)), href="/docs", text="Docs"),
        ],
        "html": """<!DOCTYPE html><html><head><meta charset="utf-8"><title>Beta</title></head>
<body>
<div style="background-image: url('/hero.jpg'); width:98px; height:80px"></div>
<a href="/api/send">Send message</a>
<a href="/docs">Docs</a>
</body></html>
""",
    },
    "gamma": {
        "size": (160, 120),
        "background": (255, 255, 255),
        "regions": [
            ((20, 20, 70, 70), (10, 110, 90)),
            ((20, 85, 140, 100), (200, 60, 20)),
        ],
        "origin": "https://gamma.example/",
        "elements": [
            _element("img", ((20, 20), (70, 70)), src="/photo.png"),
            _element(
                "a", ((20, 85), (140, 100)), href="https://out.example/go", text="Go"
            ),
        ],
        "html": """<!DOCTYPE html><html><head><meta charset="utf-8"><title>Gamma</title></head>
<body><img src="/photo.png"><a href="https://out.example/go">Go</a></body></html>
""",
    },
}


def write_pages() -> None:
    for page_id, spec in PAGES.items():
        page_dir = FIXTURES / "pages" / page_id
        page_dir.mkdir(parents=True, exist_ok=True)
        width, height = spec["size"]

        canvas = _canvas(width, height, spec["background"])
        for box, rgb in spec["regions"]:
            _fill(canvas, box, rgb)
        RasterImage.from_array(canvas).save(page_dir / "original.png")

        dump_obj = {
            "origin": spec["origin"],
            "viewport": {"width": width, "height": height},
            "elements": spec["elements"],
        }
        dump_text = json.dumps(dump_obj, indent=2) + "\n"
        (page_dir / "geometry.json").write_text(dump_text, encoding="utf-8")

        resource_list = extract_resources(parse_geometry_dump(dump_text))
        (page_dir / "resources.json").write_text(
            serialize_resource_list(resource_list), encoding="utf-8"
        )
        (page_dir / "original.html").write_text(spec["html"], encoding="utf-8")


SEVEN_ELEMENT_DUMP = {
    "origin": "https://seven.example/",
    "viewport": {"width": 300, "height": 200},
    "elements": [
        _element("a", ((10, 10), (60, 24)), href="/about", text="About"),
        _element("img", ((10, 40), (90, 100)), src="/logo.png"),
        _element("div", ((100, 40), (200, 120)), backgroundImage="/bg.jpg"),
        _element("a", ((10, 130), (80, 144)), href="https://ext.example/z", text="Ext"),
        _element("a", ((10, 150), (60, 164)), visible=False, href="/hidden", text="Hidden"),
        _element("img", ((100, 150), (160, 190)), visible=False, src="/h.png"),
        _element("span", ((200, 10), (200, 40)), text="zero width"),
    ],
}


CORPUS: dict[str, str] = {
    "01_comment_script": """<!DOCTYPE html>
<html><head><title>One</title><script>alert(1)</script></head>
<body><!-- note to self --><p>Hello</p><script src="app.js"></script></body></html>
""",
    "02_hidden_inline": """<html><body>
<div style="display:none"><p>invisible</p></div>
<div style="color:red">visible</div>
<span style="visibility: hidden">gone</span>
</body></html>
""",
    "03_hidden_attr": """<html><body><section hidden><h1>secret</h1></section><p>shown</p></body></html>
""",
    "04_head_metadata": """<html><head>
<meta charset="utf-8">
<meta name="viewport" content="width=device-width">
<meta name="description" content="drop me">
<meta property="og:title" content="drop me too">
<link rel="stylesheet" href="main.css">
<link rel="icon" href="favicon.ico">
<base href="https://example.com/">
<title>Kept</title>
<style>body { margin: 0 }</style>
</head><body><p>content</p></body></html>
""",
    "05_noscript": """<html><body><noscript><p>enable js</p></noscript><main>app</main></body></html>
""",
    "06_nested_lists": """<html><body><ul>
  <li>alpha</li>
  <li>beta<ul><li>nested</li></ul></li>
</ul></body></html>
""",
    "07_table": """<html><body><table>
<tr><th>h1</th><th>h2</th></tr>
<tr><td>a</td><td>b</td></tr>
</table></body></html>
""",
    "08_entities": """<html><body><p>Fish &amp; chips &lt;later&gt; café &copy; 2020</p></body></html>
""",
    "09_unclosed": """<html><body><p>first para<p>second para<div>block<span>text</body></html>
""",
    "10_stray_end": """<html><body></section><p>odd</p></div></body></html>
""",
    "11_uppercase": """<HTML><BODY><P STYLE="color:blue">Loud</P><IMG SRC="x.png"></BODY></HTML>
""",
    "12_bool_attrs": """<html><body><input type="checkbox" checked disabled><video controls></video></body></html>
""",
    "13_inline_style_bg": """<html><body>
<div style="background-image: url('hero.jpg'); height: 40px">hero</div>
<div style="background: #fff url(tile.png) repeat-x">tiled</div>
</body></html>
""",
    "14_anchor_variety": """<html><body>
<a href="/internal">in</a>
<a href="https://other.example/">out</a>
<a>nameless</a>
</body></html>
""",
    "15_deep_nesting": """<html><body><div><div><div><div><p>deep</p></div></div></div></div></body></html>
""",
    "16_comment_only": """<!-- leading --><html><!-- in html --><body><!-- in body --></body></html><!-- trailing -->
""",
    "17_whitespace_runs": """<html><body>
    <p>a</p>

    <p>b</p>
\t<p>c</p>
</body></html>
""",
    "18_raw_style": """<html><head><style>
a > b { content: "<not a tag>"; }
</style></head><body><p>styled</p></body></html>
""",
    "19_form": """<html><body><form action="/api/submit" method="post">
<label>Name <input name="n"></label>
<button type="submit">Send</button>
</form></body></html>
""",
    "20_figure": """<html><body><figure>
<img src="pic.jpg" alt="pic">
<figcaption>A caption</figcaption>
</figure></body></html>
""",
    "21_mixed_hidden": """<html><body>
<div style="display:block"><p>kept</p><em style="DISPLAY:NONE">dropped</em></div>
<p style="visibility:visible">also kept</p>
</body></html>
""",
    "22_iframe_object": """<html><body><iframe src="frame.html"></iframe><object data="movie.swf"></object></body></html>
""",
    "23_pre_text": """<html><body><pre>
  indented   text
     stays</pre></body></html>
""",
    "24_duplicate_attrs": """<html><body><p class="a" class="b">dup</p></body></html>
""",
}


def write_corpus() -> None:
    corpus_dir = FIXTURES / "html_corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    for name, text in CORPUS.items():
        (corpus_dir / f"{name}.html").write_text(text, encoding="utf-8")


def main() -> None:
    write_pages()
    write_corpus()
    (FIXTURES / "geometry_dump_7.json").write_text(
        json.dumps(SEVEN_ELEMENT_DUMP, indent=2) + "\n", encoding="utf-8"
    )
    print(f"fixtures written under {FIXTURES}")


if __name__ == "__main__":
    main()
