"""Placeholder-box substitution implementing the psfrag placement rules.

The replacement box is placed so that its posn reference point lands on
the psposn reference point of the PostScript tag box, rotated relative to
the tag's orientation and scaled about the pinned point. Substituting
stroked rectangles for the tags makes those semantics checkable without
typesetting anything.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

from .affine import Affine
from .directives import PosCode
from .epsio import TagOccurrence, scan_tags
from .fontmetrics import string_extents
from .labeling import PsfragEntry, TagRegistry

PREVIEW_CREATOR = b"%%Creator: labelforge-preview"


class UnmatchedTagWarning(UserWarning):
    """A shown string had no registry entry and was passed through."""


@dataclass(frozen=True)
class LabelBox:
    """Box frame: origin bottom-left, baseline at y = depth."""

    width: float
    height: float  # total, above the box bottom
    depth: float = 0.0  # baseline height above the box bottom

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("box width and height must be positive")
        if not (0 <= self.depth < self.height):
            raise ValueError("depth must lie in [0, height)")


def reference_point(box: LabelBox, code: PosCode) -> tuple[float, float]:
    """Box-frame coordinates of the reference point named by `code`."""
    x = {"l": 0.0, "c": box.width / 2.0, "r": box.width}[code.horizontal]
    y = {"b": 0.0, "B": box.depth, "c": box.height / 2.0, "t": box.height}[code.vertical]
    return x, y


def tag_box_for(occ: TagOccurrence) -> LabelBox:
    """Estimated box of the shown tag string at the occurrence's scale."""
    width, height, depth = string_extents(occ.tag, occ.font_size)
    s = occ.scale
    return LabelBox(max(width, 1e-6) * s, height * s, depth * s)


def place(replacement: LabelBox,
          entry: PsfragEntry,
          occ: TagOccurrence,
          tag_box: LabelBox) -> Affine:
    """Device transform taking replacement-box coordinates to the page.

    The occurrence's device position is the baseline-left point of the
    tag string, i.e. the tag box point (0, depth). Applying the returned
    transform to the replacement's posn reference point yields exactly
    the device image of the tag box's psposn reference point.
    """
    if entry.scale <= 0:
        raise ValueError("entry scale must be positive")
    ps_ref = reference_point(tag_box, entry.psposn)
    offset = Affine.rotation(occ.rotation).apply_vector(
        ps_ref[0], ps_ref[1] - tag_box.depth)
    pinned = (occ.device_position[0] + offset[0],
              occ.device_position[1] + offset[1])
    latex_ref = reference_point(replacement, entry.posn)
    return (Affine.translation(*pinned)
            @ Affine.rotation(occ.rotation + entry.rot)
            @ Affine.scaling(entry.scale)
            @ Affine.translation(-latex_ref[0], -latex_ref[1]))


def default_measure(body: str) -> LabelBox:
    """Character-count box heuristic at the writer's 10 pt nominal size."""
    return LabelBox(width=5.0 * max(len(body), 1), height=10.0, depth=2.0)


def _fmt6(v: float) -> str:
    if v == 0:
        v = 0.0
    s = f"{v:.6f}".rstrip("0").rstrip(".")
    return s if s not in ("", "-0") else "0"


def _preview_block(occ: TagOccurrence, box: LabelBox, transform: Affine) -> bytes:
    a, b, c, d, tx, ty = transform.as_ps_array()
    w, h, depth = box.width, box.height, box.depth
    lines = [
        "gsave",
        f"[{_fmt6(a)} {_fmt6(b)} {_fmt6(c)} {_fmt6(d)} {_fmt6(tx)} {_fmt6(ty)}] concat",
        "0 setgray 0.4 setlinewidth",
        f"newpath 0 0 moveto {_fmt6(w)} 0 lineto {_fmt6(w)} {_fmt6(h)} lineto"
        f" 0 {_fmt6(h)} lineto closepath stroke",
        f"newpath 0 {_fmt6(depth)} moveto {_fmt6(w)} {_fmt6(depth)} lineto stroke",
        f"/Times-Roman 4 selectfont 1 {_fmt6(depth + 1)} moveto"
        f" ({occ.tag}) show",
        "grestore",
    ]
    return ("\n".join(lines) + "\n").encode("latin-1")


def substitute_preview(eps: bytes,
                       registry: TagRegistry,
                       measure: Callable[[str], LabelBox] = default_measure,
                       ) -> bytes:
    """Replace matched shows by placed placeholder boxes.

    Each matched tag string is blanked and a stroked rectangle with a
    baseline line and the tag name in 4 pt type is drawn under the
    placement transform. Unmatched text is left untouched (with a
    warning). The output carries a labelforge-preview creator marker.
    """
    matched: list[tuple[TagOccurrence, bytes]] = []
    for occ in scan_tags(eps):
        entry = registry.get(occ.tag)
        if entry is None:
            warnings.warn(f"shown text {occ.tag!r} has no psfrag entry",
                          UnmatchedTagWarning, stacklevel=2)
            continue
        box = measure(entry.body)
        transform = place(box, entry, occ, tag_box_for(occ))
        matched.append((occ, _preview_block(occ, box, transform)))

    out = bytearray(eps)
    for occ, _block in sorted(matched, key=lambda m: m[0].byte_span, reverse=True):
        start, end = occ.byte_span
        out[start:end] = b"()"

    drawing = b"".join(block for _occ, block in matched)
    if drawing:
        anchor = out.rfind(b"\nshowpage")
        if anchor >= 0:
            out[anchor + 1:anchor + 1] = drawing
        else:
            out += drawing

    first_eol = out.find(b"\n")
    banner = PREVIEW_CREATOR + b"\n"
    if first_eol >= 0:
        out[first_eol + 1:first_eol + 1] = banner
    else:
        out += b"\n" + banner
    return bytes(out)
