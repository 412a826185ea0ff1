"""Deterministic CSV/JSON writers and minimal SVG diagrams."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from xml.sax.saxutils import quoteattr

import numpy as np

SCHEMA = "ptwell/1"

CURVE_FIELDS = ("interval_id", "line_kind", "k", "xi")
BRANCH_FIELDS = ("branch_id", "xi", "re_u", "im_u", "re_E", "im_E", "status")
ATLAS_FIELDS = ("a", "xi_min", "n_min", "error")


def fmt(v) -> str:
    """Shortest round-trip text for numbers; identifiers pass through."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def parse(s: str):
    if s == "":
        return None
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def jsonable(obj):
    """Convert numpy scalars and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, complex):
        return [jsonable(obj.real), jsonable(obj.imag)]
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8", newline="\n")
    return path


def write_csv(path, fields, rows) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(fields)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    with Path(path).open(encoding="utf-8", newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [tuple(parse(c) for c in row) for row in r]


def manifest(command: str, params: dict, notes=()) -> dict:
    from . import __version__
    return {
        "schema": SCHEMA,
        "tool": "ptwell",
        "version": __version__,
        "command": command,
        "params": params,
        "notes": list(notes),
    }


class SvgPlot:
    """A single axes box mapping data coordinates onto an SVG viewport."""

    def __init__(self, x_range, y_range, *, width=720, height=420, margin=50,
                 x_label="", y_label="", y_offset=0):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1.0
        self.w, self.h, self.m = width, height, margin
        self.y_offset = y_offset
        self.items = []
        self.x_label, self.y_label = x_label, y_label

    def _px(self, x, y):
        y = min(max(y, self.y0), self.y1)
        px = self.m + (x - self.x0) / (self.x1 - self.x0) * (self.w - 2 * self.m)
        py = self.y_offset + self.h - self.m - (y - self.y0) / (self.y1 - self.y0) * (self.h - 2 * self.m)
        return px, py

    def polyline(self, xs, ys, **attrs):
        pts = " ".join("%.3f,%.3f" % self._px(x, y) for x, y in zip(xs, ys)
                       if not math.isnan(y))
        self.items.append(_element("polyline", points=pts, fill="none",
                                   stroke=attrs.pop("stroke", "black"), **attrs))

    def vline(self, x, **attrs):
        x1, y1 = self._px(x, self.y0)
        x2, y2 = self._px(x, self.y1)
        self.items.append(_element("line", x1="%.3f" % x1, y1="%.3f" % y1, x2="%.3f" % x2,
                                   y2="%.3f" % y2, stroke=attrs.pop("stroke", "black"), **attrs))

    def marker(self, x, y, **attrs):
        cx, cy = self._px(x, y)
        self.items.append(_element("circle", cx="%.3f" % cx, cy="%.3f" % cy, r="4", **attrs))

    def frame(self):
        x0, y0 = self._px(self.x0, self.y0)
        x1, y1 = self._px(self.x1, self.y1)
        out = [_element("rect", x="%.3f" % x0, y="%.3f" % y1, width="%.3f" % (x1 - x0),
                        height="%.3f" % (y0 - y1), fill="none", stroke="gray")]
        out.append('<text x="%.1f" y="%.1f" font-size="12">%s [%s, %s]</text>'
                   % (x0, y0 + 30, self.x_label, fmt(self.x0), fmt(self.x1)))
        out.append('<text x="%.1f" y="%.1f" font-size="12">%s [%s, %s]</text>'
                   % (x0, y1 - 8, self.y_label, fmt(self.y0), fmt(self.y1)))
        return out


def _element(tag, **attrs):
    body = " ".join("%s=%s" % (k.replace("_", "-"), quoteattr(str(v))) for k, v in attrs.items())
    return "<%s %s/>" % (tag, body)


def write_svg(path, plots, title="") -> Path:
    width = max(p.w for p in plots)
    height = sum(p.h for p in plots)
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" viewBox="0 0 %d %d">'
             % (width, height, width, height)]
    if title:
        lines.append("<title>%s</title>" % title)
    for p in plots:
        lines.extend(p.frame())
        lines.extend(p.items)
    lines.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path
