"""Minimal TrueType outline font loader.

Parses exactly the tables the text renderer needs: head, hhea, maxp,
hmtx, cmap (formats 4 and 12), loca, glyf (simple and composite
outlines), and horizontal format-0 kern pairs. Outlines come back as
contours of (x, y, on_curve) points in font units with TrueType
quadratic semantics (consecutive off-curve points imply an on-curve
midpoint); rasterization lives in the text renderer, not here.

No hinting, no CFF, no variable fonts.
"""

from __future__ import annotations

import struct
from functools import lru_cache

Point = tuple[float, float, bool]
Contour = tuple[Point, ...]

_SFNT_TRUETYPE = 0x00010000
_SFNT_MAC_TRUE = 0x74727565  # 'true'

# glyf composite component flags
_ARGS_ARE_WORDS = 0x0001
_ARGS_ARE_XY = 0x0002
_HAVE_SCALE = 0x0008
_MORE_COMPONENTS = 0x0020
_HAVE_XY_SCALE = 0x0040
_HAVE_2X2 = 0x0080

# glyf simple-glyph point flags
_ON_CURVE = 0x01
_X_SHORT = 0x02
_Y_SHORT = 0x04
_REPEAT = 0x08
_X_SAME_OR_POS = 0x10
_Y_SAME_OR_POS = 0x20


class FontError(Exception):
    """Font file is missing, truncated, or uses unsupported features."""


def _u16(data, offset):
    return struct.unpack_from(">H", data, offset)[0]


def _s16(data, offset):
    return struct.unpack_from(">h", data, offset)[0]


def _u32(data, offset):
    return struct.unpack_from(">L", data, offset)[0]


class TrueTypeFont:
    """One parsed font file. Immutable after construction; safe to share."""

    def __init__(self, data: bytes):
        self.data = bytes(data)
        if len(data) < 12:
            raise FontError("not a TrueType font: file too short")
        version = _u32(data, 0)
        if version not in (_SFNT_TRUETYPE, _SFNT_MAC_TRUE):
            raise FontError(f"unsupported sfnt version 0x{version:08X} (CFF/OTTO not supported)")
        num_tables = _u16(data, 4)
        self._tables: dict[bytes, tuple[int, int]] = {}
        for i in range(num_tables):
            tag, _chk, offset, length = struct.unpack_from(">4sLLL", data, 12 + 16 * i)
            if offset + length > len(data):
                raise FontError(f"table {tag!r} extends past end of file")
            self._tables[tag] = (offset, length)

        head = self._table(b"head")
        self.units_per_em: int = _u16(data, head + 18)
        self._loca_long = _s16(data, head + 50) == 1

        hhea = self._table(b"hhea")
        self.ascender: int = _s16(data, hhea + 4)
        self.descender: int = _s16(data, hhea + 6)  # typically negative
        self.line_gap: int = _s16(data, hhea + 8)
        num_hmetrics = _u16(data, hhea + 34)

        maxp = self._table(b"maxp")
        self.num_glyphs: int = _u16(data, maxp + 4)

        hmtx = self._table(b"hmtx")
        self._advances: list[int] = []
        for gid in range(self.num_glyphs):
            if gid < num_hmetrics:
                self._advances.append(_u16(data, hmtx + 4 * gid))
            else:
                self._advances.append(self._advances[num_hmetrics - 1])

        self.cmap: dict[int, int] = self._parse_cmap()
        self._loca = self._parse_loca()
        self.kern_pairs: dict[tuple[int, int], int] = self._parse_kern()

    @classmethod
    def from_file(cls, path) -> "TrueTypeFont":
        try:
            with open(path, "rb") as fh:
                return cls(fh.read())
        except OSError as exc:
            raise FontError(f"cannot read font file {path}: {exc}") from exc

    # -- table plumbing --

    def _table(self, tag: bytes) -> int:
        if tag not in self._tables:
            raise FontError(f"required table {tag.decode()!r} missing")
        return self._tables[tag][0]

    def _has_table(self, tag: bytes) -> bool:
        return tag in self._tables

    # -- cmap --

    def _parse_cmap(self) -> dict[int, int]:
        data = self.data
        base = self._table(b"cmap")
        subtables = {}
        for i in range(_u16(data, base + 2)):
            platform, encoding, offset = struct.unpack_from(">HHL", data, base + 4 + 8 * i)
            subtables[(platform, encoding)] = base + offset
        # prefer full-Unicode format 12 exposures, then BMP format 4
        for key in ((3, 10), (0, 4), (0, 6), (3, 1), (0, 3), (0, 2), (0, 1), (0, 0)):
            if key in subtables:
                offset = subtables[key]
                fmt = _u16(data, offset)
                if fmt == 12:
                    return self._parse_cmap12(offset)
                if fmt == 4:
                    return self._parse_cmap4(offset)
        raise FontError("no supported cmap subtable (need format 4 or 12)")

    def _parse_cmap4(self, offset: int) -> dict[int, int]:
        data = self.data
        seg_count = _u16(data, offset + 6) // 2
        ends = offset + 14
        starts = ends + seg_count * 2 + 2
        deltas = starts + seg_count * 2
        range_offsets = deltas + seg_count * 2
        mapping: dict[int, int] = {}
        for seg in range(seg_count):
            end = _u16(data, ends + 2 * seg)
            start = _u16(data, starts + 2 * seg)
            delta = _s16(data, deltas + 2 * seg)
            range_offset = _u16(data, range_offsets + 2 * seg)
            if start == 0xFFFF:
                continue
            for cp in range(start, min(end, 0xFFFE) + 1):
                if range_offset == 0:
                    gid = (cp + delta) & 0xFFFF
                else:
                    addr = range_offsets + 2 * seg + range_offset + 2 * (cp - start)
                    gid = _u16(data, addr)
                    if gid != 0:
                        gid = (gid + delta) & 0xFFFF
                if gid:
                    mapping[cp] = gid
        return mapping

    def _parse_cmap12(self, offset: int) -> dict[int, int]:
        data = self.data
        n_groups = _u32(data, offset + 12)
        mapping: dict[int, int] = {}
        for i in range(n_groups):
            start, end, start_gid = struct.unpack_from(">LLL", data, offset + 16 + 12 * i)
            for k in range(end - start + 1):
                gid = start_gid + k
                if gid:
                    mapping[start + k] = gid
        return mapping

    # -- loca / glyf --

    def _parse_loca(self) -> list[int]:
        data = self.data
        loca = self._table(b"loca")
        count = self.num_glyphs + 1
        if self._loca_long:
            return [_u32(data, loca + 4 * i) for i in range(count)]
        return [2 * _u16(data, loca + 2 * i) for i in range(count)]

    def glyph_id(self, codepoint: int) -> int:
        """Glyph index for a codepoint; 0 (.notdef) when unmapped."""
        return self.cmap.get(codepoint, 0)

    def advance(self, gid: int) -> int:
        """Horizontal advance in font units."""
        return self._advances[gid]

    def kerning(self, left_gid: int, right_gid: int) -> int:
        return self.kern_pairs.get((left_gid, right_gid), 0)

    @lru_cache(maxsize=512)
    def glyph_contours(self, gid: int, _depth: int = 0) -> tuple[Contour, ...]:
        """Composite-resolved outline contours for one glyph, in font units."""
        if gid < 0 or gid >= self.num_glyphs:
            raise FontError(f"glyph id {gid} out of range")
        if _depth > 8:
            raise FontError("composite glyph nesting too deep")
        start, end = self._loca[gid], self._loca[gid + 1]
        if start == end:
            return ()
        glyf = self._table(b"glyf")
        offset = glyf + start
        n_contours = _s16(self.data, offset)
        if n_contours >= 0:
            return self._parse_simple_glyph(offset, n_contours)
        return self._parse_composite_glyph(offset, _depth)

    def _parse_simple_glyph(self, offset: int, n_contours: int) -> tuple[Contour, ...]:
        data = self.data
        pos = offset + 10
        end_pts = [_u16(data, pos + 2 * i) for i in range(n_contours)]
        pos += 2 * n_contours
        n_points = end_pts[-1] + 1 if end_pts else 0
        instruction_len = _u16(data, pos)
        pos += 2 + instruction_len

        flags: list[int] = []
        while len(flags) < n_points:
            flag = data[pos]
            pos += 1
            flags.append(flag)
            if flag & _REPEAT:
                repeat = data[pos]
                pos += 1
                flags.extend([flag] * repeat)
        flags = flags[:n_points]

        xs: list[int] = []
        x = 0
        for flag in flags:
            if flag & _X_SHORT:
                delta = data[pos]
                pos += 1
                x += delta if flag & _X_SAME_OR_POS else -delta
            elif not flag & _X_SAME_OR_POS:
                x += _s16(data, pos)
                pos += 2
            xs.append(x)
        ys: list[int] = []
        y = 0
        for flag in flags:
            if flag & _Y_SHORT:
                delta = data[pos]
                pos += 1
                y += delta if flag & _Y_SAME_OR_POS else -delta
            elif not flag & _Y_SAME_OR_POS:
                y += _s16(data, pos)
                pos += 2
            ys.append(y)

        contours: list[Contour] = []
        first = 0
        for last in end_pts:
            contour = tuple(
                (float(xs[i]), float(ys[i]), bool(flags[i] & _ON_CURVE))
                for i in range(first, last + 1)
            )
            if contour:
                contours.append(contour)
            first = last + 1
        return tuple(contours)

    def _parse_composite_glyph(self, offset: int, depth: int) -> tuple[Contour, ...]:
        data = self.data
        pos = offset + 10
        contours: list[Contour] = []
        while True:
            flags = _u16(data, pos)
            comp_gid = _u16(data, pos + 2)
            pos += 4
            if not flags & _ARGS_ARE_XY:
                raise FontError("point-matching composite glyphs not supported")
            if flags & _ARGS_ARE_WORDS:
                dx, dy = struct.unpack_from(">hh", data, pos)
                pos += 4
            else:
                dx, dy = struct.unpack_from(">bb", data, pos)
                pos += 2

            a = d = 1.0
            b = c = 0.0
            if flags & _HAVE_SCALE:
                a = d = _s16(data, pos) / 16384.0
                pos += 2
            elif flags & _HAVE_XY_SCALE:
                a = _s16(data, pos) / 16384.0
                d = _s16(data, pos + 2) / 16384.0
                pos += 4
            elif flags & _HAVE_2X2:
                a, b, c, d = (v / 16384.0 for v in struct.unpack_from(">hhhh", data, pos))
                pos += 8

            for contour in self.glyph_contours(comp_gid, depth + 1):
                contours.append(tuple(
                    (a * x + c * y + dx, b * x + d * y + dy, on) for (x, y, on) in contour
                ))
            if not flags & _MORE_COMPONENTS:
                break
        return tuple(contours)

    # -- kern --

    def _parse_kern(self) -> dict[tuple[int, int], int]:
        if not self._has_table(b"kern"):
            return {}
        data = self.data
        base, _length = self._tables[b"kern"]
        if _u16(data, base) != 0:  # Apple 'kern' version 1.x not supported
            return {}
        pairs: dict[tuple[int, int], int] = {}
        pos = base + 4
        for _ in range(_u16(data, base + 2)):
            length = _u16(data, pos + 2)
            coverage = _u16(data, pos + 4)
            fmt = coverage >> 8
            horizontal = coverage & 0x0001
            if fmt == 0 and horizontal:
                n_pairs = _u16(data, pos + 6)
                entry = pos + 14
                for i in range(n_pairs):
                    left, right, value = struct.unpack_from(">HHh", data, entry + 6 * i)
                    pairs[(left, right)] = value
            pos += length
        return pairs


def flatten_contour(contour: Contour, segments_per_curve: int = 8) -> list[tuple[float, float]]:
    """Flatten one TrueType contour to a closed polyline.

    Consecutive off-curve points get the implied on-curve midpoint;
    each quadratic arc is subdivided into a fixed number of chords so
    output is deterministic.
    """
    if not contour:
        return []
    points = list(contour)
    # rotate so the contour starts on-curve, synthesizing a start if needed
    if not points[0][2]:
        on_idx = next((i for i, p in enumerate(points) if p[2]), None)
        if on_idx is None:
            first, last = points[0], points[-1]
            points.insert(0, ((first[0] + last[0]) / 2.0, (first[1] + last[1]) / 2.0, True))
        else:
            points = points[on_idx:] + points[:on_idx]

    # expand implied midpoints between consecutive off-curve points
    expanded: list[tuple[float, float, bool]] = []
    for pt in points:
        if expanded and not expanded[-1][2] and not pt[2]:
            mid = ((expanded[-1][0] + pt[0]) / 2.0, (expanded[-1][1] + pt[1]) / 2.0, True)
            expanded.append(mid)
        expanded.append(pt)
    if not expanded[-1][2] and not expanded[0][2]:
        expanded.append(((expanded[-1][0] + expanded[0][0]) / 2.0,
                         (expanded[-1][1] + expanded[0][1]) / 2.0, True))

    poly: list[tuple[float, float]] = [(expanded[0][0], expanded[0][1])]
    i = 0
    n = len(expanded)
    while i < n:
        nxt = expanded[(i + 1) % n]
        if nxt[2]:
            if (i + 1) % n == 0:
                break
            poly.append((nxt[0], nxt[1]))
            i += 1
            continue
        ctrl = nxt
        end = expanded[(i + 2) % n]
        start = expanded[i]
        for s in range(1, segments_per_curve + 1):
            t = s / segments_per_curve
            mt = 1.0 - t
            x = mt * mt * start[0] + 2 * mt * t * ctrl[0] + t * t * end[0]
            y = mt * mt * start[1] + 2 * mt * t * ctrl[1] + t * t * end[1]
            poly.append((x, y))
        if (i + 2) % n == 0:
            break
        i += 2
    if poly[0] != poly[-1]:
        poly.append(poly[0])
    return poly
