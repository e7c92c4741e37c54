#!/usr/bin/env python3
"""Regenerate the TrueType font assets shipped with posterkit.

Two faces are produced from one pixel-grid glyph table:

  blockmono.ttf  - fixed pitch, every advance exactly 600/1000 em (0.6 em)
  blocksans.ttf  - proportional (per-glyph trimmed advances) with kern pairs

Grid: 5 columns x 100 units per cell, 1000 units per em, ascent 800,
descent 200, line gap 0. Caps occupy rows y=0..700; lowercase x-height
rows y=0..500 with descenders to y=-200. Accented letters are TrueType
composite glyphs (base + mark); two circle glyphs carry quadratic
off-curve contours so curve handling stays exercised.

The output is byte-deterministic (fixed timestamps), so `--check` can
verify the committed assets match this script.

Usage: python scripts/build_test_font.py [--check]
"""

from __future__ import annotations

import argparse
import json
import math
import struct
import sys
from pathlib import Path

ASSETS = Path(__file__).resolve().parent.parent / "src" / "posterkit" / "fonts" / "assets"

UPM = 1000
CELL = 100
ASCENT = 800
DESCENT = 200  # positive magnitude; hhea stores -200
MONO_ADVANCE = 600
# Fixed longDateTime (seconds since 1904-01-01) so builds are reproducible.
TIMESTAMP = 3786825600

# --- glyph bitmaps -----------------------------------------------------------
# Each entry: (top_row_in_cells_above_baseline, rows). Row i spans
# y in [(top - i - 1) * CELL, (top - i) * CELL); '#' marks an inked cell.

G = {
    "A": (7, [".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"]),
    "B": (7, ["####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."]),
    "C": (7, [".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."]),
    "D": (7, ["####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."]),
    "E": (7, ["#####", "#....", "#....", "####.", "#....", "#....", "#####"]),
    "F": (7, ["#####", "#....", "#....", "####.", "#....", "#....", "#...."]),
    "G": (7, [".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".###."]),
    "H": (7, ["#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"]),
    "I": (7, [".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."]),
    "J": (7, ["....#", "....#", "....#", "....#", "....#", "#...#", ".###."]),
    "K": (7, ["#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"]),
    "L": (7, ["#....", "#....", "#....", "#....", "#....", "#....", "#####"]),
    "M": (7, ["#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"]),
    "N": (7, ["#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#", "#...#"]),
    "O": (7, [".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."]),
    "P": (7, ["####.", "#...#", "#...#", "####.", "#....", "#....", "#...."]),
    "Q": (7, [".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"]),
    "R": (7, ["####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"]),
    "S": (7, [".####", "#....", "#....", ".###.", "....#", "....#", "####."]),
    "T": (7, ["#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."]),
    "U": (7, ["#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."]),
    "V": (7, ["#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."]),
    "W": (7, ["#...#", "#...#", "#...#", "#.#.#", "#.#.#", "##.##", "#...#"]),
    "X": (7, ["#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"]),
    "Y": (7, ["#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."]),
    "Z": (7, ["#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"]),
    "a": (5, [".###.", "....#", ".####", "#...#", ".####"]),
    "b": (7, ["#....", "#....", "####.", "#...#", "#...#", "#...#", "####."]),
    "c": (5, [".###.", "#....", "#....", "#...#", ".###."]),
    "d": (7, ["....#", "....#", ".####", "#...#", "#...#", "#...#", ".####"]),
    "e": (5, [".###.", "#...#", "#####", "#....", ".###."]),
    "f": (7, ["..##.", ".#..#", ".#...", "###..", ".#...", ".#...", ".#..."]),
    "g": (5, [".####", "#...#", "#...#", ".####", "....#", "#...#", ".###."]),
    "h": (7, ["#....", "#....", "####.", "#...#", "#...#", "#...#", "#...#"]),
    "i": (7, ["..#..", ".....", ".##..", "..#..", "..#..", "..#..", ".###."]),
    "j": (7, ["...#.", ".....", "..##.", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."]),
    "k": (7, ["#....", "#....", "#..#.", "#.#..", "##...", "#.#..", "#..#."]),
    "l": (7, [".##..", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."]),
    "m": (5, ["##.#.", "#.#.#", "#.#.#", "#.#.#", "#...#"]),
    "n": (5, ["####.", "#...#", "#...#", "#...#", "#...#"]),
    "o": (5, [".###.", "#...#", "#...#", "#...#", ".###."]),
    "p": (5, ["####.", "#...#", "#...#", "####.", "#....", "#....", "#...."]),
    "q": (5, [".####", "#...#", "#...#", ".####", "....#", "....#", "....#"]),
    "r": (5, ["#.##.", "##..#", "#....", "#....", "#...."]),
    "s": (5, [".####", "#....", ".###.", "....#", "####."]),
    "t": (7, [".#...", ".#...", "###..", ".#...", ".#...", ".#..#", "..##."]),
    "u": (5, ["#...#", "#...#", "#...#", "#..##", ".##.#"]),
    "v": (5, ["#...#", "#...#", "#...#", ".#.#.", "..#.."]),
    "w": (5, ["#...#", "#...#", "#.#.#", "#.#.#", ".#.#."]),
    "x": (5, ["#...#", ".#.#.", "..#..", ".#.#.", "#...#"]),
    "y": (5, ["#...#", "#...#", "#...#", ".####", "....#", "#...#", ".###."]),
    "z": (5, ["#####", "...#.", "..#..", ".#...", "#####"]),
    "0": (7, [".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."]),
    "1": (7, ["..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."]),
    "2": (7, [".###.", "#...#", "....#", "..##.", ".#...", "#....", "#####"]),
    "3": (7, [".###.", "#...#", "....#", "..##.", "....#", "#...#", ".###."]),
    "4": (7, ["...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."]),
    "5": (7, ["#####", "#....", "####.", "....#", "....#", "#...#", ".###."]),
    "6": (7, ["..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."]),
    "7": (7, ["#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."]),
    "8": (7, [".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."]),
    "9": (7, [".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."]),
    "!": (7, ["..#..", "..#..", "..#..", "..#..", "..#..", ".....", "..#.."]),
    '"': (7, [".#.#.", ".#.#.", ".#.#."]),
    "#": (7, [".#.#.", ".#.#.", "#####", ".#.#.", "#####", ".#.#.", ".#.#."]),
    "$": (7, ["..#..", ".####", "#.#..", ".###.", "..#.#", "####.", "..#.."]),
    "%": (7, ["##..#", "##..#", "...#.", "..#..", ".#...", "#..##", "#..##"]),
    "&": (7, [".##..", "#..#.", "#.#..", ".#...", "#.#.#", "#..#.", ".##.#"]),
    "'": (7, ["..#..", "..#..", ".#..."]),
    "(": (7, ["...#.", "..#..", ".#...", ".#...", ".#...", "..#..", "...#."]),
    ")": (7, [".#...", "..#..", "...#.", "...#.", "...#.", "..#..", ".#..."]),
    "*": (6, ["..#..", "#.#.#", ".###.", "#.#.#", "..#.."]),
    "+": (6, ["..#..", "..#..", "#####", "..#..", "..#.."]),
    ",": (1, ["..#..", "..#..", ".#..."]),
    "-": (4, ["#####"]),
    ".": (1, ["..#.."]),
    "/": (7, ["....#", "....#", "...#.", "..#..", ".#...", "#....", "#...."]),
    ":": (4, ["..#..", ".....", ".....", "..#.."]),
    ";": (4, ["..#..", ".....", ".....", "..#..", ".#..."]),
    "<": (6, ["...#.", "..#..", ".#...", "..#..", "...#."]),
    "=": (5, ["#####", ".....", "#####"]),
    ">": (6, [".#...", "..#..", "...#.", "..#..", ".#..."]),
    "?": (7, [".###.", "#...#", "....#", "..##.", "..#..", ".....", "..#.."]),
    "@": (7, [".###.", "#...#", "#.###", "#.#.#", "#.##.", "#....", ".###."]),
    "[": (7, [".###.", ".#...", ".#...", ".#...", ".#...", ".#...", ".###."]),
    "\\": (7, ["#....", "#....", ".#...", "..#..", "...#.", "....#", "....#"]),
    "]": (7, [".###.", "...#.", "...#.", "...#.", "...#.", "...#.", ".###."]),
    "^": (7, ["..#..", ".#.#.", "#...#"]),
    "_": (0, ["#####"]),
    "`": (7, [".#...", "..#.."]),
    "{": (7, ["...##", "..#..", "..#..", ".#...", "..#..", "..#..", "...##"]),
    "|": (7, ["..#..", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."]),
    "}": (7, ["##...", "..#..", "..#..", "...#.", "..#..", "..#..", "##..."]),
    "~": (5, [".##.#", "#.##."]),
    "ß": (7, [".##..", "#..#.", "#.#..", "#..#.", "#...#", "#.##.", "#...."]),  # sharp s
    "¡": (5, ["..#..", ".....", "..#..", "..#..", "..#..", "..#..", "..#.."]),
    "¿": (5, ["..#..", ".....", "..#..", ".#...", "#....", "#...#", ".###."]),
    "°": (7, ["..#..", ".#.#.", "..#.."]),
    "–": (4, ["####."]),
    "—": (4, ["#####"]),
    "…": (1, ["#.#.#"]),
    "•": (5, [".###.", ".###.", ".###."]),
    "ı": (5, [".##..", "..#..", "..#..", "..#..", ".###."]),  # dotless i
}

# Marks are unencoded glyphs, drawn at baseline and lifted via composite offsets.
MARKS = {
    "acutecomb": (2, ["...#.", "..#.."]),
    "gravecomb": (2, [".#...", "..#.."]),
    "circumcomb": (2, ["..#..", ".#.#."]),
    "dieresiscomb": (1, [".#.#."]),
    "tildecomb": (2, [".##.#", "#.##."]),
    "ringcomb": (3, ["..#..", ".#.#.", "..#.."]),
    "cedillacomb": (2, ["..#..", ".##.."]),
}

_CAP_LIFT = 750
_LOW_LIFT = 600
_MARK_FOR = {"grave": "gravecomb", "acute": "acutecomb", "circ": "circumcomb",
             "dier": "dieresiscomb", "tilde": "tildecomb", "ring": "ringcomb"}

# char -> (base char, mark name, dy)
COMPOSITES: dict[str, tuple[str, str, int]] = {}
for base, accents in {
    "A": "Àgrave Áacute Âcirc Ädier Åring",
    "E": "Ègrave Éacute Êcirc Ëdier",
    "I": "Ìgrave Íacute Îcirc Ïdier",
    "N": "Ñtilde",
    "O": "Ògrave Óacute Ôcirc Ödier",
    "U": "Ùgrave Úacute Ûcirc Üdier",
    "a": "àgrave áacute âcirc ädier åring",
    "e": "ègrave éacute êcirc ëdier",
    "ı": "ìgrave íacute îcirc ïdier",
    "n": "ñtilde",
    "o": "ògrave óacute ôcirc ödier",
    "u": "ùgrave úacute ûcirc üdier",
}.items():
    lift = _CAP_LIFT if base.isupper() else _LOW_LIFT
    for item in accents.split():
        COMPOSITES[item[0]] = (base, _MARK_FOR[item[1:]], lift)
COMPOSITES["Ç"] = ("C", "cedillacomb", -200)  # Ccedilla
COMPOSITES["ç"] = ("c", "cedillacomb", -200)  # ccedilla

KERN_PAIRS_SANS = [("A", "V", -60), ("V", "A", -60), ("A", "T", -60), ("T", "A", -60),
                   ("L", "T", -60), ("T", "o", -40), ("P", "A", -40)]


# --- outline assembly --------------------------------------------------------

def bitmap_contours(top: int, rows: list[str], x_offset: int) -> list[list[tuple[int, int, bool]]]:
    """Horizontal runs of inked cells to clockwise (y-up) rectangle contours."""
    contours = []
    for i, row in enumerate(rows):
        y1 = (top - i) * CELL
        y0 = y1 - CELL
        col = 0
        while col < len(row):
            if row[col] == "#":
                start = col
                while col < len(row) and row[col] == "#":
                    col += 1
                x0 = x_offset + start * CELL
                x1 = x_offset + col * CELL
                contours.append([(x0, y0, True), (x0, y1, True), (x1, y1, True), (x1, y0, True)])
            else:
                col += 1
    return contours


def circle_contour(cx: int, cy: int, r: int, clockwise: bool) -> list[tuple[int, int, bool]]:
    """Quadratic approximation with 8 on-curve / 8 off-curve points."""
    r_off = r / math.cos(math.pi / 8)
    pts = []
    for k in range(8):
        a_on = k * math.pi / 4
        a_off = a_on + math.pi / 8
        pts.append((round(cx + r * math.cos(a_on)), round(cy + r * math.sin(a_on)), True))
        pts.append((round(cx + r_off * math.cos(a_off)), round(cy + r_off * math.sin(a_off)), False))
    if clockwise:
        pts = [pts[0]] + pts[:0:-1]
    return pts


def ink_columns(rows: list[str]) -> tuple[int, int]:
    cols = [c for row in rows for c, ch in enumerate(row) if ch == "#"]
    return (min(cols), max(cols)) if cols else (0, -1)


class GlyphDef:
    def __init__(self, contours=None, components=None, advance=0):
        self.contours = contours or []        # list of [(x, y, on), ...]
        self.components = components or []    # list of (glyph_name, dx, dy)
        self.advance = advance


def build_glyph_set(mono: bool) -> tuple[list[str], dict[str, GlyphDef], dict[int, str]]:
    order = [".notdef", "space"]
    glyphs: dict[str, GlyphDef] = {}
    cmap: dict[int, str] = {32: "space"}

    notdef = GlyphDef(advance=MONO_ADVANCE if mono else 600)
    notdef.contours = [
        [(50, 0, True), (50, 700, True), (550, 700, True), (550, 0, True)],
        [(150, 100, True), (450, 100, True), (450, 600, True), (150, 600, True)],
    ]
    glyphs[".notdef"] = notdef
    glyphs["space"] = GlyphDef(advance=MONO_ADVANCE if mono else 300)

    def glyph_name(ch: str) -> str:
        return f"uni{ord(ch):04X}"

    simple_names = {}
    for ch in sorted(G, key=ord):
        top, rows = G[ch]
        lo, hi = ink_columns(rows)
        if mono:
            x_offset, advance = 50, MONO_ADVANCE
        else:
            x_offset = 50 - lo * CELL
            advance = (hi - lo + 1) * CELL + 100
        name = glyph_name(ch)
        glyphs[name] = GlyphDef(contours=bitmap_contours(top, rows, x_offset), advance=advance)
        cmap[ord(ch)] = name
        simple_names[ch] = name
        order.append(name)

    # circles: quadratic-curve coverage for the rasterizer
    circle = GlyphDef(advance=MONO_ADVANCE, contours=[circle_contour(300, 300, 250, True)])
    ring = GlyphDef(advance=MONO_ADVANCE, contours=[
        circle_contour(300, 300, 250, True), circle_contour(300, 300, 170, False)])
    for cp, name, gdef in ((0x25CF, "uni25CF", circle), (0x25CB, "uni25CB", ring)):
        glyphs[name] = gdef
        cmap[cp] = name
        order.append(name)

    mark_names = {}
    for mark, (top, rows) in MARKS.items():
        lo, hi = ink_columns(rows)
        x_offset = 50 if mono else 50 - lo * CELL
        glyphs[mark] = GlyphDef(contours=bitmap_contours(top, rows, x_offset), advance=0)
        mark_names[mark] = (lo, hi)
        order.append(mark)

    for ch in sorted(COMPOSITES, key=ord):
        base_ch, mark, dy = COMPOSITES[ch]
        base_name = simple_names[base_ch]
        if mono:
            dx = 0
        else:
            b_lo, b_hi = ink_columns(G[base_ch][1])
            m_lo, m_hi = mark_names[mark]
            base_center = 50 + (b_hi - b_lo + 1) * CELL / 2
            mark_center = 50 + (m_hi - m_lo + 1) * CELL / 2
            dx = round(base_center - mark_center)
        name = glyph_name(ch)
        glyphs[name] = GlyphDef(
            components=[(base_name, 0, 0), (mark, dx, dy)],
            advance=glyphs[base_name].advance,
        )
        cmap[ord(ch)] = name
        order.append(name)

    order_sorted = [".notdef", "space"]
    order_sorted += sorted((n for n in order if n.startswith("uni")),
                           key=lambda n: int(n[3:], 16))
    order_sorted += [n for n in MARKS]
    return order_sorted, glyphs, cmap


# --- TrueType binary writing -------------------------------------------------

def _pad4(data: bytes) -> bytes:
    return data + b"\0" * (-len(data) % 4)


def _checksum(data: bytes) -> int:
    data = _pad4(data)
    return sum(struct.unpack(f">{len(data) // 4}L", data)) & 0xFFFFFFFF


def glyph_bbox(name, glyphs, cache):
    if name in cache:
        return cache[name]
    g = glyphs[name]
    xs, ys = [], []
    for contour in g.contours:
        xs += [p[0] for p in contour]
        ys += [p[1] for p in contour]
    for comp_name, dx, dy in g.components:
        bb = glyph_bbox(comp_name, glyphs, cache)
        if bb is not None:
            xs += [bb[0] + dx, bb[2] + dx]
            ys += [bb[1] + dy, bb[3] + dy]
    box = (min(xs), min(ys), max(xs), max(ys)) if xs else None
    cache[name] = box
    return box


def encode_simple_glyph(g: GlyphDef, bbox) -> bytes:
    end_pts = []
    total = 0
    for contour in g.contours:
        total += len(contour)
        end_pts.append(total - 1)
    head = struct.pack(">hhhhh", len(g.contours), *bbox)
    body = struct.pack(f">{len(end_pts)}H", *end_pts)
    body += struct.pack(">H", 0)  # no instructions
    flags = b"".join(b"\x01" if on else b"\x00" for c in g.contours for (_, _, on) in c)
    xs, ys = b"", b""
    px = py = 0
    for contour in g.contours:
        for x, y, _ in contour:
            xs += struct.pack(">h", x - px)
            ys += struct.pack(">h", y - py)
            px, py = x, y
    return head + body + flags + xs + ys


def encode_composite_glyph(g: GlyphDef, bbox, gid_of) -> bytes:
    out = struct.pack(">hhhhh", -1, *bbox)
    for i, (comp_name, dx, dy) in enumerate(g.components):
        flags = 0x0001 | 0x0002 | 0x0004  # words | xy values | round to grid
        if i + 1 < len(g.components):
            flags |= 0x0020  # more components
        out += struct.pack(">HHhh", flags, gid_of[comp_name], dx, dy)
    return out


def build_cmap4(cmap: dict[int, str], gid_of: dict[str, int]) -> bytes:
    codes = sorted(cmap)
    segments = []
    i = 0
    while i < len(codes):
        j = i
        while (j + 1 < len(codes) and codes[j + 1] == codes[j] + 1
               and gid_of[cmap[codes[j + 1]]] == gid_of[cmap[codes[j]]] + 1):
            j += 1
        segments.append((codes[i], codes[j], gid_of[cmap[codes[i]]] - codes[i]))
        i = j + 1
    segments.append((0xFFFF, 0xFFFF, 1))

    seg_count = len(segments)
    search_range = 2 ** int(math.log2(seg_count)) * 2
    entry_selector = int(math.log2(seg_count))
    range_shift = seg_count * 2 - search_range
    sub = struct.pack(">HHHH", seg_count * 2, search_range, entry_selector, range_shift)
    sub += struct.pack(f">{seg_count}H", *(s[1] for s in segments))
    sub += struct.pack(">H", 0)
    sub += struct.pack(f">{seg_count}H", *(s[0] for s in segments))
    sub += struct.pack(f">{seg_count}H", *((s[2]) & 0xFFFF for s in segments))
    sub += struct.pack(f">{seg_count}H", *([0] * seg_count))
    subtable = struct.pack(">HHH", 4, 14 + len(sub), 0) + sub
    return struct.pack(">HHHHL", 0, 1, 3, 1, 12) + subtable


def build_name(family: str) -> bytes:
    strings = {1: family, 2: "Regular", 3: f"posterkit: {family}",
               4: f"{family} Regular", 6: family.replace(" ", "")}
    records = b""
    data = b""
    for name_id in sorted(strings):
        encoded = strings[name_id].encode("utf-16-be")
        records += struct.pack(">HHHHHH", 3, 1, 0x409, name_id, len(encoded), len(data))
        data += encoded
    return struct.pack(">HHH", 0, len(strings), 6 + 12 * len(strings)) + records + data


def build_kern(pairs, cmap, gid_of) -> bytes:
    rows = sorted(
        ((gid_of[cmap[ord(l)]], gid_of[cmap[ord(r)]], v) for l, r, v in pairs)
    )
    n = len(rows)
    search_range = 2 ** int(math.log2(n)) * 6
    entry_selector = int(math.log2(n))
    body = struct.pack(">HHHH", n, search_range, entry_selector, n * 6 - search_range)
    for left, right, value in rows:
        body += struct.pack(">HHh", left, right, value)
    sub = struct.pack(">HHH", 0, 14 + len(body), 0x0001) + body
    return struct.pack(">HH", 0, 1) + sub


def build_font(mono: bool, family: str) -> bytes:
    order, glyphs, cmap = build_glyph_set(mono)
    gid_of = {name: gid for gid, name in enumerate(order)}
    bbox_cache: dict[str, tuple | None] = {}

    glyf = b""
    loca = [0]
    for name in order:
        g = glyphs[name]
        bbox = glyph_bbox(name, glyphs, bbox_cache)
        if not g.contours and not g.components:
            entry = b""
        elif g.components:
            entry = encode_composite_glyph(g, bbox, gid_of)
        else:
            entry = encode_simple_glyph(g, bbox)
        glyf += _pad4(entry)
        loca.append(len(glyf))

    boxes = [b for b in (bbox_cache.get(n) for n in order) if b]
    x_min = min(b[0] for b in boxes)
    y_min = min(b[1] for b in boxes)
    x_max = max(b[2] for b in boxes)
    y_max = max(b[3] for b in boxes)

    hmtx = b""
    for name in order:
        bb = bbox_cache.get(name)
        hmtx += struct.pack(">Hh", glyphs[name].advance, bb[0] if bb else 0)

    max_pts = max((sum(len(c) for c in g.contours) for g in glyphs.values()), default=0)
    max_ctr = max((len(g.contours) for g in glyphs.values()), default=0)

    head = struct.pack(
        ">LLLLHHqqhhhhHHhhh",
        0x00010000, 0x00010000, 0, 0x5F0F3CF5, 0x0003, UPM,
        TIMESTAMP, TIMESTAMP, x_min, y_min, x_max, y_max,
        0, 6, 2, 1, 0,
    )
    hhea = struct.pack(
        ">LhhhHhhhhhhhhhhhH",
        0x00010000, ASCENT, -DESCENT, 0,
        max(g.advance for g in glyphs.values()),
        x_min, 0, x_max, 1, 0, 0, 0, 0, 0, 0, 0, len(order),
    )
    maxp = struct.pack(
        ">LHHHHHHHHHHHHHH",
        0x00010000, len(order), max_pts, max_ctr, max_pts * 2, max_ctr * 2,
        2, 0, 0, 0, 0, 0, 0, 2, 1,
    )
    os2 = struct.pack(
        ">HhHHHhhhhhhhhhhhh10sLLLL4sHHHhhh LL".replace(" ", ""),
        1, 500, 400, 5, 0, 200, 100, 200, 100, 0, 0, 0, 0, 400, -200, 50, 350,
        bytes(10), 0x00000003, 0, 0, 0, b"PKIT", 0x0040,
        min(cmap), min(max(cmap), 0xFFFF), ASCENT, -DESCENT, 0,
        0x00000001, 0,
    )
    post = struct.pack(">LLhhLLLLL", 0x00030000, 0, -100, 50, 1 if mono else 0, 0, 0, 0, 0)
    loca_data = struct.pack(f">{len(loca)}L", *loca)

    tables = {
        b"cmap": build_cmap4(cmap, gid_of),
        b"glyf": glyf,
        b"head": head,
        b"hhea": hhea,
        b"hmtx": hmtx,
        b"loca": loca_data,
        b"maxp": maxp,
        b"name": build_name(family),
        b"OS/2": os2,
        b"post": post,
    }
    if not mono:
        tables[b"kern"] = build_kern(KERN_PAIRS_SANS, cmap, gid_of)

    tags = sorted(tables)
    num = len(tags)
    search_range = 2 ** int(math.log2(num)) * 16
    entry_selector = int(math.log2(num))
    header = struct.pack(">LHHHH", 0x00010000, num, search_range, entry_selector,
                         num * 16 - search_range)
    offset = 12 + 16 * num
    directory = b""
    body = b""
    head_offset = None
    for tag in tags:
        data = tables[tag]
        if tag == b"head":
            head_offset = offset
        directory += struct.pack(">4sLLL", tag, _checksum(data), offset, len(data))
        body += _pad4(data)
        offset += len(_pad4(data))

    font = header + directory + body
    adjustment = (0xB1B0AFBA - _checksum(font)) & 0xFFFFFFFF
    font = font[: head_offset + 8] + struct.pack(">L", adjustment) + font[head_offset + 12 :]
    return font


METRICS_DOC = """# Test font metrics

Both faces are generated by `scripts/build_test_font.py` from a 5-column
pixel grid (100 units per cell, 1000 units per em).

## blockmono (fixed pitch)

| metric            | font units | em      |
|-------------------|-----------:|--------:|
| units per em      |       1000 |    1.00 |
| advance (every glyph) |    600 |    0.60 |
| ascent            |        800 |    0.80 |
| descent           |        200 |    0.20 |
| line gap          |          0 |    0.00 |
| line height       |       1000 |    1.00 |
| cap height        |        700 |    0.70 |
| x-height          |        500 |    0.50 |

At size S px: every advance is exactly 0.6*S px and one line is exactly
S px tall. Example: "AB" at 100 px measures 120 px wide.

## blocksans (proportional)

Same vertical metrics. Advances are per-glyph: ink columns * 100 + 100
side bearings (space = 300). Carries a format-0 `kern` table with pairs
such as (A, V) = -60.

Coverage: ASCII, Latin-1 accented letters (composite glyphs), and the
circle glyphs U+25CF / U+25CB built from quadratic contours.
"""


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--check", action="store_true",
                        help="verify committed assets match regeneration")
    args = parser.parse_args()

    ASSETS.mkdir(parents=True, exist_ok=True)
    outputs = {
        "blockmono.ttf": build_font(mono=True, family="Block Mono"),
        "blocksans.ttf": build_font(mono=False, family="Block Sans"),
        "manifest.json": (json.dumps(
            {"fallback": "blockmono",
             "fonts": {"blockmono": "blockmono.ttf", "blocksans": "blocksans.ttf"}},
            indent=2, sort_keys=True) + "\n").encode(),
        "METRICS.md": METRICS_DOC.encode(),
    }
    status = 0
    for filename, data in outputs.items():
        path = ASSETS / filename
        if args.check:
            if not path.exists() or path.read_bytes() != data:
                print(f"STALE {path}")
                status = 1
            else:
                print(f"ok    {path}")
        else:
            path.write_bytes(data)
            print(f"wrote {path} ({len(data)} bytes)")
    return status


if __name__ == "__main__":
    sys.exit(main())
