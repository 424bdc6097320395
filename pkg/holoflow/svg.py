"""
Deterministic SVG output for phase portraits
"""

import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

from lxml import etree

from .field import VectorField
from .models import LocalClass, PointKind, TractRegion, Trajectory, is_infinite
from .portrait import PortraitSpec


SVG_NS = "http://www.w3.org/2000/svg"
NSMAP = {None: SVG_NS}


def svg_ns(tag: str) -> str:
    """Prepend the SVG namespace to tag"""
    return "{%s}%s" % (SVG_NS, tag)


class Canvas:
    """Affine map from the window to the viewBox plus element helpers"""

    def __init__(self, spec: PortraitSpec):
        self.style = spec.style
        self.width = float(self.style["width"])
        self.height = float(self.style["height"])
        self.window = spec.window
        self.precision = int(self.style["precision"])
        self.root = etree.Element(svg_ns("svg"), nsmap=NSMAP)
        self.root.set("version", "1.1")
        self.root.set("width", self.num(self.width))
        self.root.set("height", self.num(self.height))
        self.root.set("viewBox", f"0 0 {self.num(self.width)} {self.num(self.height)}")

    def num(self, value: float) -> str:
        text = f"{value:.{self.precision}f}".rstrip("0").rstrip(".")
        return "0" if text in ("-0", "") else text

    def map(self, z: complex) -> Tuple[float, float]:
        x0, x1, y0, y1 = self.window
        return ((z.real - x0) / (x1 - x0) * self.width, (y1 - z.imag) / (y1 - y0) * self.height)

    def group(self, name: str, parent=None, **attrs) -> etree._Element:
        node = etree.SubElement(self.root if parent is None else parent, svg_ns("g"), {"id": name})
        for key, value in attrs.items():
            node.set(key.replace("_", "-"), str(value))
        return node

    def polyline(self, parent, points: Sequence[complex], stroke: str, width: float) -> None:
        """Polylines broken at non-finite samples"""
        run: List[str] = []
        for z in list(points) + [complex(math.nan, 0)]:
            if math.isfinite(z.real) and math.isfinite(z.imag):
                x, y = self.map(z)
                run.append(f"{self.num(x)},{self.num(y)}")
                continue
            if len(run) >= 2:
                etree.SubElement(parent, svg_ns("polyline"), {
                    "points": " ".join(run),
                    "fill": "none",
                    "stroke": stroke,
                    "stroke-width": self.num(width),
                })
            run = []

    def circle(self, parent, x: float, y: float, r: float, fill: str, stroke: str = "none") -> None:
        etree.SubElement(parent, svg_ns("circle"), {
            "cx": self.num(x), "cy": self.num(y), "r": self.num(r), "fill": fill, "stroke": stroke,
        })

    def line(self, parent, a: Tuple[float, float], b: Tuple[float, float], stroke: str, width: float) -> None:
        etree.SubElement(parent, svg_ns("line"), {
            "x1": self.num(a[0]), "y1": self.num(a[1]), "x2": self.num(b[0]), "y2": self.num(b[1]),
            "stroke": stroke, "stroke-width": self.num(width),
        })

    def text(self, parent, x: float, y: float, content: str, fill: str = "#000000") -> None:
        node = etree.SubElement(parent, svg_ns("text"), {
            "x": self.num(x), "y": self.num(y), "font-size": str(self.style["font_size"]),
            "font-family": "sans-serif", "fill": fill,
        })
        node.text = content


def _draw_tracts(canvas: Canvas, tracts: Sequence[TractRegion]) -> None:
    layer = canvas.group("tracts", opacity=canvas.num(float(canvas.style["tract_opacity"])))
    for region in tracts:
        fill = canvas.style["elliptic_fill"] if is_infinite(region.value) else canvas.style["hyperbolic_fill"]
        h = region.cell_size
        for cell in sorted(region.cells):
            corner = region.center(cell) + complex(-0.5 * h, 0.5 * h)
            x, y = canvas.map(corner)
            w = h / (canvas.window[1] - canvas.window[0]) * canvas.width
            v = h / (canvas.window[3] - canvas.window[2]) * canvas.height
            etree.SubElement(layer, svg_ns("rect"), {
                "x": canvas.num(x), "y": canvas.num(y), "width": canvas.num(w), "height": canvas.num(v),
                "fill": fill,
            })


def _draw_glyph(canvas: Canvas, layer, point: LocalClass) -> None:
    if not (math.isfinite(point.point.real) and math.isfinite(point.point.imag)):
        return
    x, y = canvas.map(point.point)
    size = float(canvas.style["glyph_size"])
    if point.kind == PointKind.POLE:
        color = canvas.style["pole_color"]
        canvas.line(layer, (x - size, y - size), (x + size, y + size), color, 1.5)
        canvas.line(layer, (x - size, y + size), (x + size, y - size), color, 1.5)
    elif point.kind == PointKind.ZERO:
        color = canvas.style["zero_color"]
        canvas.circle(layer, x, y, size, color)
        label = str(point.multiplicity)
        if point.multivalued:
            label += f" res={point.residue.real:.3g}{point.residue.imag:+.3g}i multivalued"
        canvas.text(layer, x + size + 2, y - size, label, color)
    elif point.kind == PointKind.ESSENTIAL:
        canvas.circle(layer, x, y, 0.6 * size, "none", canvas.style["essential_color"])


LEGEND = (
    ("streamline", "streamline_color"),
    ("separatrix", "separatrix_color"),
    ("zero", "zero_color"),
    ("pole", "pole_color"),
    ("essential", "essential_color"),
    ("hyperbolic tract", "hyperbolic_fill"),
    ("elliptic tract", "elliptic_fill"),
)


def _draw_legend(canvas: Canvas) -> None:
    layer = canvas.group("legend")
    size = float(canvas.style["font_size"])
    for k, (label, key) in enumerate(LEGEND):
        y = 8 + (k + 1) * (size + 4)
        etree.SubElement(layer, svg_ns("rect"), {
            "x": "8", "y": canvas.num(y - size + 2), "width": canvas.num(size - 2),
            "height": canvas.num(size - 2), "fill": canvas.style[key],
        })
        canvas.text(layer, 8 + size + 4, y, label)


def emit_svg(field: VectorField, spec: PortraitSpec, streamlines: Sequence[Trajectory],
             skeleton: Sequence[Trajectory], points: Optional[Sequence[LocalClass]] = None) -> str:
    """
    SVG document for the portrait: tracts, streamlines, separatrices, glyphs, legend

    Output depends only on the inputs and the style: identical inputs give
    byte-identical documents.
    """
    canvas = Canvas(spec)
    title = etree.SubElement(canvas.root, svg_ns("title"))
    title.text = field.label
    etree.SubElement(canvas.root, svg_ns("rect"), {
        "x": "0", "y": "0", "width": canvas.num(canvas.width), "height": canvas.num(canvas.height),
        "fill": spec.style["background"],
    })

    if not spec.is_empty:
        defs = etree.SubElement(canvas.root, svg_ns("defs"))
        clip = etree.SubElement(defs, svg_ns("clipPath"), {"id": "window"})
        etree.SubElement(clip, svg_ns("rect"), {
            "x": "0", "y": "0", "width": canvas.num(canvas.width), "height": canvas.num(canvas.height),
        })
        if spec.tracts:
            _draw_tracts(canvas, spec.tracts)
        layer = canvas.group("streamlines", clip_path="url(#window)")
        for line in streamlines:
            canvas.polyline(layer, line.points, spec.style["streamline_color"],
                            float(spec.style["streamline_width"]))
        layer = canvas.group("separatrices", clip_path="url(#window)")
        for line in skeleton:
            canvas.polyline(layer, line.points, spec.style["separatrix_color"],
                            float(spec.style["separatrix_width"]))
        if spec.census_glyphs:
            layer = canvas.group("singular-points")
            for point in points if points is not None else (spec.points or []):
                _draw_glyph(canvas, layer, point)

    _draw_legend(canvas)
    return etree.tostring(canvas.root, xml_declaration=True, encoding="UTF-8",
                          pretty_print=True).decode("utf-8")


def write_svg(document: str, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(document)


def summary(document: str) -> Dict[str, Any]:
    """Element counts of an emitted document"""
    root = etree.fromstring(document.encode("utf-8"))
    groups = {g.get("id"): len(g) for g in root.iter(svg_ns("g"))}
    return {"groups": groups, "polylines": len(list(root.iter(svg_ns("polyline"))))}
