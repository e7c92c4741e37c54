"""Layout and typography planning.

Two planners share one contract: a deterministic rule-based planner and
a client for a remote planner service. Whatever a planner returns is
passed through repair_layout, which forces the output to satisfy every
typography invariant (clamping, fallback fonts, overlap resolution), so
downstream code never sees an invalid spec. User-fixed attributes are
honored verbatim and never repaired away.

Rule-based defaults (all exposed on PlannerRules): title box top at 12%
of canvas height with font size 10% of height, subtitle below at 45% of
the title size, information lines stacked upward from 88% height at
2.5% size; text color flips between near-white and near-black on a 0.5
background-luminance threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .document import Alignment, Role, TypographySpec, parse_color
from .errors import InputError
from .fonts import BUILTIN_MONO, BUILTIN_SANS
from .raster import RasterImage
from .textrender import measure_text

LUMINANCE_GRID = 8  # descriptor resolution; coarse but per-box usable


class Unsatisfiable(Exception):
    """No conflict-free placement exists for the given constraints."""


def srgb_to_linear(channel: float) -> float:
    if channel <= 0.04045:
        return channel / 12.92
    return ((channel + 0.055) / 1.055) ** 2.4


def relative_luminance(color: str) -> float:
    """WCAG relative luminance of an sRGB hex color, in [0, 1]."""
    r, g, b, _ = parse_color(color)
    return (0.2126 * srgb_to_linear(r / 255.0)
            + 0.7152 * srgb_to_linear(g / 255.0)
            + 0.0722 * srgb_to_linear(b / 255.0))


@dataclass(frozen=True)
class BackgroundStats:
    """Image statistics sent to planners instead of raw pixels."""

    luminance_grid: tuple[tuple[float, ...], ...]  # LUMINANCE_GRID^2 linear means
    dominant_colors: tuple[str, ...]


def describe_background(image: RasterImage, grid: int = LUMINANCE_GRID) -> BackgroundStats:
    pixels = image.pixels[..., :3].astype(np.float64) / 255.0
    linear = np.where(pixels <= 0.04045, pixels / 12.92, ((pixels + 0.055) / 1.055) ** 2.4)
    lum = 0.2126 * linear[..., 0] + 0.7152 * linear[..., 1] + 0.0722 * linear[..., 2]

    h, w = lum.shape
    rows = np.linspace(0, h, grid + 1).astype(int)
    cols = np.linspace(0, w, grid + 1).astype(int)
    cells = tuple(
        tuple(
            float(lum[rows[r] : max(rows[r + 1], rows[r] + 1),
                      cols[c] : max(cols[c + 1], cols[c] + 1)].mean())
            for c in range(grid)
        )
        for r in range(grid)
    )

    # dominant colors from a 4-bit-per-channel histogram
    quant = (image.pixels[..., :3] >> 4).reshape(-1, 3)
    packed = (quant[:, 0].astype(np.int32) << 8) | (quant[:, 1].astype(np.int32) << 4) | quant[:, 2]
    counts = np.bincount(packed, minlength=4096)
    top = np.argsort(counts, kind="stable")[::-1][:3]
    dominant = tuple(
        "#{:02X}{:02X}{:02X}".format(((int(p) >> 8) & 0xF) * 17, ((int(p) >> 4) & 0xF) * 17, (int(p) & 0xF) * 17)
        for p in top if counts[p] > 0
    )
    return BackgroundStats(luminance_grid=cells, dominant_colors=dominant)


@dataclass(frozen=True)
class PlanItem:
    """One text item to place, with any user-fixed attributes."""

    role: Role
    content: str
    fixed_box: tuple[int, int, int, int] | None = None  # x, y, w, h
    fixed_font_id: str | None = None
    fixed_font_size: float | None = None
    fixed_color: str | None = None
    fixed_alignment: Alignment | None = None
    fixed_rotation_deg: float | None = None
    layout_hint: str | None = None

    def fixed_attributes(self) -> tuple[str, ...]:
        names = []
        if self.fixed_box is not None:
            names.append("box")
        for attr in ("font_id", "font_size", "color", "alignment", "rotation_deg"):
            if getattr(self, f"fixed_{attr}") is not None:
                names.append(attr)
        return tuple(names)


@dataclass(frozen=True)
class PlanRequest:
    canvas_width: int
    canvas_height: int
    items: tuple[PlanItem, ...]
    background: BackgroundStats | str | None = None  # stats, prose, or unknown
    style_hint: str | None = None


@dataclass(frozen=True)
class PlannedItem:
    spec: TypographySpec
    applied_constraints: tuple[str, ...]


@dataclass(frozen=True)
class PlanResult:
    items: tuple[PlannedItem, ...]
    planner_id: str
    diagnostics: tuple[str, ...] = ()


@dataclass(frozen=True)
class PlannerRules:
    title_top_frac: float = 0.12
    title_size_frac: float = 0.10
    subtitle_gap_frac: float = 0.02
    subtitle_size_ratio: float = 0.45
    info_bottom_frac: float = 0.88
    info_size_frac: float = 0.025
    info_gap_frac: float = 0.01
    side_margin_frac: float = 0.05
    luminance_threshold: float = 0.5
    light_color: str = "#F5F5F0"
    dark_color: str = "#1A1A1A"
    fonts: dict = field(default_factory=lambda: {
        Role.TITLE: BUILTIN_SANS, Role.SUBTITLE: BUILTIN_SANS, Role.INFORMATION: BUILTIN_MONO,
    })


_ROLE_PRIORITY = {Role.TITLE: 0, Role.SUBTITLE: 1, Role.INFORMATION: 2}


def validate_request(req: PlanRequest) -> None:
    if not req.items:
        raise InputError("plan request must contain at least one item")
    if sum(1 for item in req.items if item.role is Role.TITLE) > 1:
        raise InputError("plan request may contain at most one Title item")
    for i, item in enumerate(req.items):
        if not item.content.strip():
            raise InputError(f"items[{i}]: content must be non-empty")
        if item.fixed_box is not None:
            x, y, w, h = item.fixed_box
            if w <= 0 or h <= 0 or x < 0 or y < 0 or x + w > req.canvas_width or y + h > req.canvas_height:
                raise InputError(f"items[{i}]: fixed box {item.fixed_box} lies outside the canvas")
            if item.fixed_font_size is not None and item.fixed_font_size > h:
                raise InputError(f"items[{i}]: fixed font_size exceeds fixed box height")
        if item.fixed_font_size is not None and item.fixed_font_size <= 0:
            raise InputError(f"items[{i}]: fixed font_size must be > 0")
        if item.fixed_font_size is not None and item.fixed_font_size > req.canvas_height:
            raise InputError(f"items[{i}]: fixed font_size exceeds canvas height")
        if item.fixed_color is not None:
            try:
                parse_color(item.fixed_color)
            except ValueError as exc:
                raise InputError(f"items[{i}]: {exc}") from exc
        if item.fixed_rotation_deg is not None and not (-180.0 <= item.fixed_rotation_deg < 180.0):
            raise InputError(f"items[{i}]: fixed rotation outside [-180, 180)")


def _mean_luminance_under(background, box: tuple[int, int, int, int],
                          canvas: tuple[int, int]) -> float | None:
    if not isinstance(background, BackgroundStats):
        return None
    grid = background.luminance_grid
    n = len(grid)
    x, y, w, h = box
    cw, ch = canvas
    c0 = min(int(x * n / cw), n - 1)
    c1 = min(int(math.ceil((x + w) * n / cw)), n)
    r0 = min(int(y * n / ch), n - 1)
    r1 = min(int(math.ceil((y + h) * n / ch)), n)
    cells = [grid[r][c] for r in range(r0, max(r1, r0 + 1)) for c in range(c0, max(c1, c0 + 1))]
    return sum(cells) / len(cells)


def _contrast_color(background, box, canvas, rules: PlannerRules) -> str:
    lum = _mean_luminance_under(background, box, canvas)
    if lum is None:
        return rules.dark_color
    return rules.light_color if lum < rules.luminance_threshold else rules.dark_color


def plan_rule_based(req: PlanRequest, registry=None, rules: PlannerRules | None = None) -> PlanResult:
    """Deterministic planner: prominence-ordered sizes and placements,
    contrast-driven colors, then overlap repair."""
    validate_request(req)
    rules = rules or PlannerRules()
    registry = registry or _builtin_registry()
    W, H = req.canvas_width, req.canvas_height
    margin = round(rules.side_margin_frac * W)

    title_size = max(6.0, round(rules.title_size_frac * H))
    sizes: dict[Role, float] = {
        Role.TITLE: title_size,
        Role.SUBTITLE: max(6.0, round(rules.subtitle_size_ratio * title_size)),
        Role.INFORMATION: max(6.0, round(rules.info_size_frac * H)),
    }

    def compute_box(item: PlanItem, size: float, font_id: str) -> tuple[int, int, int, int, float]:
        """Centered box sized to the measured text, clamped to margins.
        Returns (x, y_placeholder, w, h, size)."""
        width, height = measure_text(registry, item.content, font_id, size)
        box_w = min(W - 2 * margin, int(math.ceil(width)) + 2 * max(2, margin // 4))
        box_w = max(box_w, 8)
        box_h = max(int(math.ceil(height)), int(math.ceil(size)))
        box_h = min(box_h, H)
        x = (W - box_w) // 2
        return x, 0, box_w, box_h, size

    specs: list[TypographySpec] = []
    applied: list[tuple[str, ...]] = []
    diagnostics: list[str] = []
    roles: list[Role] = []

    # first pass: sizes, fonts, colors, boxes without vertical stacking
    staged = []
    for item in req.items:
        font_id = item.fixed_font_id if item.fixed_font_id is not None else rules.fonts[item.role]
        if item.fixed_font_id is not None and font_id not in registry:
            diagnostics.append(f"fixed font {font_id!r} not in registry; kept verbatim")
        size = item.fixed_font_size if item.fixed_font_size is not None else sizes[item.role]
        if item.fixed_box is not None:
            x, y, w, h = item.fixed_box
            if item.fixed_font_size is None:
                size = min(size, h)
        else:
            x, _, w, h, size2 = compute_box(item, size, font_id)
            y = 0
            if item.fixed_font_size is None:
                size = min(size2, h)
            elif size > h:
                h = int(math.ceil(size))
        staged.append((item, font_id, size, x, y, w, h))
        if item.layout_hint:
            diagnostics.append(
                f"layout hint {item.layout_hint!r} ignored by rule-based planner")

    # second pass: vertical placement per role
    for idx, (item, font_id, size, x, y, w, h) in enumerate(staged):
        if item.fixed_box is None:
            if item.role is Role.TITLE:
                y = round(rules.title_top_frac * H)
            elif item.role is Role.SUBTITLE:
                title_rows = [s for s in staged if s[0].role is Role.TITLE]
                if title_rows and title_rows[0][0].fixed_box is None:
                    t = title_rows[0]
                    y = round(rules.title_top_frac * H) + t[6] + round(rules.subtitle_gap_frac * H)
                elif title_rows:
                    t = title_rows[0]
                    y = t[0].fixed_box[1] + t[0].fixed_box[3] + round(rules.subtitle_gap_frac * H)
                else:
                    y = round(rules.title_top_frac * H)
            y = max(0, min(y, H - h))
        staged[idx] = (item, font_id, size, x, y, w, h)

    info_indices = [i for i, s in enumerate(staged)
                    if s[0].role is Role.INFORMATION and s[0].fixed_box is None]
    gap = max(1, round(rules.info_gap_frac * H))
    bottom = round(rules.info_bottom_frac * H)
    for i in reversed(info_indices):
        item, font_id, size, x, y, w, h = staged[i]
        y = max(0, bottom - h)
        staged[i] = (item, font_id, size, x, y, w, h)
        bottom = y - gap

    for item, font_id, size, x, y, w, h in staged:
        color = item.fixed_color if item.fixed_color is not None else _contrast_color(
            req.background, (x, y, w, h), (W, H), rules)
        alignment = item.fixed_alignment if item.fixed_alignment is not None else Alignment.CENTER
        rotation = item.fixed_rotation_deg if item.fixed_rotation_deg is not None else 0.0
        specs.append(TypographySpec(
            x=x, y=y, box_width=w, box_height=h, font_id=font_id,
            font_size=float(size), color=color, alignment=Alignment(alignment),
            rotation_deg=float(rotation),
        ))
        applied.append(item.fixed_attributes())
        roles.append(item.role)

    repaired, repair_notes = repair_layout(
        specs, (W, H), applied, roles=roles, registry=registry)
    diagnostics.extend(repair_notes)
    return PlanResult(
        items=tuple(PlannedItem(spec=s, applied_constraints=a) for s, a in zip(repaired, applied)),
        planner_id="rule-based/v1",
        diagnostics=tuple(diagnostics),
    )


# ---------------------------------------------------------------------------
# Repair

def _boxes_overlap(a: TypographySpec, b: TypographySpec) -> bool:
    # closed boxes: adjacency counts as overlap, so repair leaves a 1 px gap
    return not (a.x + a.box_width < b.x or b.x + b.box_width < a.x
                or a.y + a.box_height < b.y or b.y + b.box_height < a.y)


def _clamp_spec(spec: TypographySpec, W: int, H: int, fixed_attrs,
                notes: list[str], tag: str) -> TypographySpec:
    x, y, w, h = spec.box
    if "box" not in fixed_attrs:
        w = min(w, W)
        h = min(h, H)
        x = min(max(x, 0), W - w)
        y = min(max(y, 0), H - h)
    size = spec.font_size
    if "font_size" in fixed_attrs:
        if size > h and "box" not in fixed_attrs:
            h = min(int(math.ceil(size)), H)
    else:
        size = min(size, float(h))
    rotation = spec.rotation_deg
    if "rotation_deg" not in fixed_attrs and not (-180.0 <= rotation < 180.0):
        rotation = ((rotation + 180.0) % 360.0) - 180.0
        notes.append(f"{tag}: rotation wrapped into [-180, 180)")
    if (x, y, w, h) != spec.box or size != spec.font_size:
        notes.append(f"{tag}: box/size clamped to canvas")
    return replace(spec, x=x, y=y, box_width=w, box_height=h,
                   font_size=size, rotation_deg=rotation)


def repair_layout(specs, canvas_size: tuple[int, int], fixed, roles=None,
                  registry=None) -> tuple[list[TypographySpec], list[str]]:
    """Force arbitrary planner output into invariant-satisfying, overlap-free
    specs.

    ``fixed`` gives, per item, the attribute names the user pinned (any of
    "box", "font_id", "font_size", "color", "alignment", "rotation_deg");
    pinned attributes are never repaired and pinned boxes are never moved.
    Overlapping pinned boxes are flagged, not resolved. Raises
    Unsatisfiable when a movable element has no overlap-free position.
    """
    W, H = canvas_size
    fixed = [frozenset(f) for f in fixed]
    specs = list(specs)
    if roles is None:
        roles = [Role.INFORMATION] * len(specs)
    notes: list[str] = []
    registry = registry or _builtin_registry()

    out: list[TypographySpec] = []
    for i, spec in enumerate(specs):
        tag = f"items[{i}]"
        repaired = _clamp_spec(spec, W, H, fixed[i], notes, tag)
        if repaired.font_id not in registry and "font_id" not in fixed[i]:
            notes.append(f"{tag}: unknown font {repaired.font_id!r} -> "
                         f"{registry.fallback_font_id!r}")
            repaired = replace(repaired, font_id=registry.fallback_font_id)
        if "color" not in fixed[i]:
            try:
                parse_color(repaired.color)
            except ValueError:
                notes.append(f"{tag}: invalid color {repaired.color!r} -> #1A1A1A")
                repaired = replace(repaired, color="#1A1A1A")
        out.append(repaired)

    order = sorted(range(len(specs)), key=lambda i: (_ROLE_PRIORITY.get(roles[i], 2), i))
    placed: list[int] = [i for i in order if "box" in fixed[i]]
    for a in range(len(placed)):
        for b in range(a + 1, len(placed)):
            if _boxes_overlap(out[placed[a]], out[placed[b]]):
                notes.append(f"items[{placed[a]}] and items[{placed[b]}] are "
                             "user-fixed and overlap; left as-is")

    for i in order:
        if "box" in fixed[i]:
            continue
        spec = out[i]
        obstacles = [out[j] for j in placed]

        def collides(candidate: TypographySpec) -> bool:
            return any(_boxes_overlap(candidate, obs) for obs in obstacles)

        if collides(spec):
            candidates = sorted(
                {spec.y}
                | {obs.y + obs.box_height + 1 for obs in obstacles}
                | {0}
            )
            downward = [y for y in candidates if y >= spec.y and y + spec.box_height <= H]
            wrapped = [y for y in candidates if y < spec.y and y + spec.box_height <= H]
            solution = None
            for y in downward + wrapped:
                trial = replace(spec, y=y)
                if not collides(trial):
                    solution = trial
                    break
            if solution is None:
                raise Unsatisfiable(f"items[{i}]: no overlap-free vertical position exists")
            if solution.y != spec.y:
                notes.append(f"items[{i}]: moved to y={solution.y} to resolve overlap")
            out[i] = solution
        placed.append(i)

    return out, notes


# ---------------------------------------------------------------------------
# Remote planner client

def plan_request_to_tree(req: PlanRequest) -> dict:
    if isinstance(req.background, BackgroundStats):
        descriptor = {
            "luminance_grid": [list(row) for row in req.background.luminance_grid],
            "dominant_colors": list(req.background.dominant_colors),
        }
    elif isinstance(req.background, str):
        descriptor = {"prose": req.background}
    else:
        descriptor = None
    items = []
    for item in req.items:
        constraints: dict = {}
        if item.fixed_box is not None:
            x, y, w, h = item.fixed_box
            constraints["box"] = {"x": x, "y": y, "box_width": w, "box_height": h}
        for attr in ("font_id", "font_size", "color", "rotation_deg"):
            value = getattr(item, f"fixed_{attr}")
            if value is not None:
                constraints[attr] = value
        if item.fixed_alignment is not None:
            constraints["alignment"] = item.fixed_alignment.value
        if item.layout_hint:
            constraints["layout_hint"] = item.layout_hint
        items.append({"role": item.role.value, "content": item.content,
                      "constraints": constraints})
    return {
        "canvas": {"width": req.canvas_width, "height": req.canvas_height},
        "background_descriptor": descriptor,
        "items": items,
        "style_hint": req.style_hint,
    }


def plan_item_from_tree(tree) -> PlanItem:
    """Parse one wire-form plan item: {role, content, constraints?}."""
    from .document import _TreeReader

    node = _TreeReader(tree, "item")
    role = node.child("role").str_()
    if role not in Role._value2member_map_:
        node.child("role").fail(f"unknown role {role!r}")
    kwargs: dict = {"role": Role(role), "content": node.child("content").str_()}
    constraints = tree.get("constraints") if isinstance(tree, dict) else None
    if constraints is not None:
        c = _TreeReader(constraints, "item.constraints")
        if "box" in constraints:
            box = c.child("box")
            kwargs["fixed_box"] = (box.child("x").int_(), box.child("y").int_(),
                                   box.child("box_width").int_(), box.child("box_height").int_())
        if "font_id" in constraints:
            kwargs["fixed_font_id"] = c.child("font_id").str_()
        if "font_size" in constraints:
            kwargs["fixed_font_size"] = c.child("font_size").float_()
        if "color" in constraints:
            kwargs["fixed_color"] = c.child("color").str_()
        if "alignment" in constraints:
            value = c.child("alignment").str_()
            if value not in Alignment._value2member_map_:
                c.child("alignment").fail(f"unknown alignment {value!r}")
            kwargs["fixed_alignment"] = Alignment(value)
        if "rotation_deg" in constraints:
            kwargs["fixed_rotation_deg"] = c.child("rotation_deg").float_()
        if "layout_hint" in constraints:
            kwargs["layout_hint"] = c.child("layout_hint").str_()
    return PlanItem(**kwargs)


_REMOTE_FIELDS = ("x", "y", "box_width", "box_height", "font_id", "font_size",
                  "color", "alignment", "rotation_deg")


def _coerce_remote_field(name: str, value):
    """Returns the coerced value or raises ValueError."""
    if name in ("x", "y", "box_width", "box_height"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError("expected a number")
        if isinstance(value, float) and not value.is_integer():
            value = round(value)
        return int(value)
    if name in ("font_size", "rotation_deg"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError("expected a number")
        return float(value)
    if name == "alignment":
        if value not in Alignment._value2member_map_:
            raise ValueError(f"unknown alignment {value!r}")
        return Alignment(value)
    if name == "color":
        parse_color(value)
        return value
    if name == "font_id":
        if not isinstance(value, str) or not value:
            raise ValueError("expected a non-empty string")
        return value
    raise AssertionError(name)


def plan_remote(req: PlanRequest, endpoint, registry=None,
                rules: PlannerRules | None = None) -> PlanResult:
    """POST the request to a remote planner and repair whatever comes back.

    Malformed fields are replaced one by one with rule-based values (each
    replacement recorded in diagnostics); only a response that is not JSON
    at all raises BackendMalformed. Transport failure raises
    BackendUnavailable with no partial result.
    """
    from .backends import post_json

    validate_request(req)
    registry = registry or _builtin_registry()
    donor = plan_rule_based(req, registry=registry, rules=rules)
    payload = plan_request_to_tree(req)
    response = post_json(endpoint, payload)

    diagnostics = list(donor.diagnostics)
    raw_items = response.get("items")
    if not isinstance(raw_items, list):
        diagnostics.append("remote response missing items[]; used rule-based plan")
        raw_items = []
    planner_id = response.get("planner_id")
    if not isinstance(planner_id, str) or not planner_id:
        planner_id = f"remote:{endpoint.url}"

    specs: list[TypographySpec] = []
    applied: list[tuple[str, ...]] = []
    roles: list[Role] = []
    for i, item in enumerate(req.items):
        donor_spec = donor.items[i].spec
        raw = raw_items[i] if i < len(raw_items) and isinstance(raw_items[i], dict) else None
        if raw is None:
            diagnostics.append(f"items[{i}]: missing in remote response; used rule-based spec")
            spec = donor_spec
        else:
            values = {}
            for name in _REMOTE_FIELDS:
                if name not in raw:
                    diagnostics.append(f"items[{i}].{name}: missing; filled from rule-based plan")
                    values[name] = getattr(donor_spec, name)
                    continue
                try:
                    values[name] = _coerce_remote_field(name, raw[name])
                except (ValueError, TypeError) as exc:
                    diagnostics.append(f"items[{i}].{name}: {exc}; filled from rule-based plan")
                    values[name] = getattr(donor_spec, name)
            spec = TypographySpec(**values)

        # user-fixed attributes win over anything remote
        if item.fixed_box is not None:
            x, y, w, h = item.fixed_box
            spec = replace(spec, x=x, y=y, box_width=w, box_height=h)
        if item.fixed_font_id is not None:
            spec = replace(spec, font_id=item.fixed_font_id)
        if item.fixed_font_size is not None:
            spec = replace(spec, font_size=item.fixed_font_size)
        if item.fixed_color is not None:
            spec = replace(spec, color=item.fixed_color)
        if item.fixed_alignment is not None:
            spec = replace(spec, alignment=item.fixed_alignment)
        if item.fixed_rotation_deg is not None:
            spec = replace(spec, rotation_deg=item.fixed_rotation_deg)
        if item.fixed_box is not None and item.fixed_font_size is None:
            x, y, w, h = item.fixed_box
            if spec.font_size > h:
                spec = replace(spec, font_size=float(h))

        specs.append(spec)
        applied.append(item.fixed_attributes())
        roles.append(item.role)

    if len(raw_items) > len(req.items):
        diagnostics.append(f"remote returned {len(raw_items) - len(req.items)} extra items; ignored")

    repaired, notes = repair_layout(specs, (req.canvas_width, req.canvas_height),
                                    applied, roles=roles, registry=registry)
    diagnostics.extend(notes)
    return PlanResult(
        items=tuple(PlannedItem(spec=s, applied_constraints=a)
                    for s, a in zip(repaired, applied)),
        planner_id=planner_id,
        diagnostics=tuple(diagnostics),
    )


def plan_result_to_tree(result: PlanResult) -> dict:
    """Wire form of a plan result (matches the planner response schema)."""
    return {
        "planner_id": result.planner_id,
        "items": [
            {
                "x": p.spec.x, "y": p.spec.y,
                "box_width": p.spec.box_width, "box_height": p.spec.box_height,
                "font_id": p.spec.font_id, "font_size": p.spec.font_size,
                "color": p.spec.color, "alignment": p.spec.alignment.value,
                "rotation_deg": p.spec.rotation_deg,
            }
            for p in result.items
        ],
    }


_BUILTIN_REGISTRY = None


def _builtin_registry():
    global _BUILTIN_REGISTRY
    if _BUILTIN_REGISTRY is None:
        from .fonts import FontRegistry
        _BUILTIN_REGISTRY = FontRegistry.builtin()
    return _BUILTIN_REGISTRY
