"""Tag derivation, psfrag entry construction, and the export pipeline.

Tags are alphanumeric placeholder strings shown inside the EPS; each one
is keyed to a `\\psfrag` replacement macro emitted into a companion .tex
file. This module owns tag uniqueness, the compact base-52 renumbering,
the anchor-to-alignment mapping, and the top-level export orchestration.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

from . import epsio
from .directives import LabelDirective, PosCode
from .exprkit import EMPTY_HOOKS, HookSet, guess_tex, print_source
from .fileio import atomic_write_bytes, atomic_write_text
from .scene import ExportOptions, Scene, auto_wrap, expand_decorations


class DuplicateTagError(ValueError):
    """Two labels requested the same explicit psfrag tag."""


class UnbalancedBraceWarning(UserWarning):
    """A verbatim replacement body has unbalanced braces."""


FALLBACK_POSITION = PosCode("b", "c")

_TAG_RE = re.compile(r"[A-Za-z0-9]+")


def is_valid_tag(tag: str) -> bool:
    return bool(_TAG_RE.fullmatch(tag))


@dataclass(frozen=True)
class PsfragEntry:
    tag: str
    posn: PosCode
    psposn: PosCode
    scale: float = 1.0
    rot: float = 0.0
    body: str = ""

    def __post_init__(self):
        if not is_valid_tag(self.tag):
            raise ValueError(f"psfrag tag must be nonempty alphanumeric: {self.tag!r}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")


class TagRegistry:
    """Ordered tag -> entry map; insertion order is primitive order."""

    def __init__(self):
        self._entries: dict[str, PsfragEntry] = {}
        self._origins: dict[str, str] = {}

    def add(self, entry: PsfragEntry, origin: str = "") -> None:
        if entry.tag in self._entries:
            raise DuplicateTagError(
                f"psfrag tag {entry.tag!r} assigned to both "
                f"{self._origins[entry.tag] or 'an earlier label'} and {origin or 'a later label'}")
        self._entries[entry.tag] = entry
        self._origins[entry.tag] = origin

    def __contains__(self, tag: str) -> bool:
        return tag in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, tag: str) -> PsfragEntry | None:
        return self._entries.get(tag)

    def tags(self) -> list[str]:
        return list(self._entries)

    def entries(self) -> list[PsfragEntry]:
        return list(self._entries.values())

    def origin(self, tag: str) -> str:
        return self._origins.get(tag, "")


def derive_tag(expr, registry: TagRegistry) -> str:
    """Alphanumeric tag from the canonical source form of the expression.

    Collisions get the smallest decimal suffix >= 2 that is free.
    """
    base = re.sub(r"[^A-Za-z0-9]", "", print_source(expr)) or "tag"
    if base not in registry:
        return base
    n = 2
    while f"{base}{n}" in registry:
        n += 1
    return f"{base}{n}"


_ALPHABET = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def shortlex_tag(index: int) -> str:
    """The index-th string (0-based) over a..z then A..Z, ordered shortlex.

    Bijective base 52: "a".."Z" for 0..51, then "aa", "ab", ...
    """
    if index < 0:
        raise ValueError("index must be nonnegative")
    n = index + 1
    chars = []
    while n > 0:
        n -= 1
        chars.append(_ALPHABET[n % 52])
        n //= 52
    return "".join(reversed(chars))


def renumber(registry: TagRegistry) -> tuple[TagRegistry, dict[str, str]]:
    """Replace every tag, in registry order, by its compact shortlex form."""
    renumbered = TagRegistry()
    tag_map: dict[str, str] = {}
    for i, entry in enumerate(registry.entries()):
        new_tag = shortlex_tag(i)
        tag_map[entry.tag] = new_tag
        renumbered.add(replace(entry, tag=new_tag), origin=registry.origin(entry.tag))
    return renumbered, tag_map


def pos_from_anchor(anchor: tuple[float, float]) -> PosCode:
    """Map a text anchor to the matching alignment code.

    Baseline alignment is never produced automatically; it is reachable
    only through explicit directives.
    """
    ax, ay = anchor
    horizontal = "l" if ax < -0.5 else ("r" if ax > 0.5 else "c")
    vertical = "t" if ay > 0.5 else ("b" if ay < -0.5 else "c")
    return PosCode(vertical, horizontal)


def resolve_alignment(directive: LabelDirective,
                      anchor: tuple[float, float] | None,
                      auto_position: bool) -> tuple[PosCode, PosCode]:
    if directive.position is not None:
        posn = directive.position
    elif auto_position and anchor is not None:
        posn = pos_from_anchor(anchor)
    else:
        posn = FALLBACK_POSITION
    psposn = directive.ps_position if directive.ps_position is not None else posn
    return posn, psposn


def _check_braces(body: str, tag: str) -> None:
    depth = 0
    for ch in body:
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth < 0:
                break
    if depth != 0:
        warnings.warn(f"replacement body for tag {tag!r} has unbalanced braces",
                      UnbalancedBraceWarning, stacklevel=3)


def build_entry(directive: LabelDirective,
                anchor: tuple[float, float] | None,
                hooks: HookSet,
                opts: ExportOptions,
                registry: TagRegistry) -> PsfragEntry:
    """Construct one entry and record it in the registry.

    Numeric scaling goes into the psfrag scale slot; automatic scaling is
    realized through the LaTeX scale hooks inside the body instead, since
    LaTeX-side scaling survives font substitution better.
    """
    origin = f"label {print_source(directive.expr)!r}"
    tag = directive.psfrag_tag or derive_tag(directive.expr, registry)
    if directive.tex_command is not None:
        body = directive.tex_command
        _check_braces(body, tag)
    else:
        body = guess_tex(directive.expr, hooks,
                         include_scale_hook=directive.scaling is None)
    posn, psposn = resolve_alignment(directive, anchor, opts.auto_position)
    scale = directive.scaling if directive.scaling is not None else 1.0
    entry = PsfragEntry(tag=tag, posn=posn, psposn=psposn, scale=scale,
                        rot=directive.rotation, body=body)
    registry.add(entry, origin=origin)
    return entry


def _fmt_num(v: float) -> str:
    if v == int(v):
        return str(int(v))
    return f"{v:.6g}"


_TEX_HEADER = (
    "% labelforge psfrag macros -- \\input this file inside a psfrags"
    " environment, before \\includegraphics\n"
)

_PROVIDES = (
    "\\providecommand{\\psfragtextstyle}[1]{#1}\n"
    "\\providecommand{\\psfragmathstyle}[1]{#1}\n"
    "\\providecommand{\\psfragnumericstyle}[1]{#1}\n"
    "\\providecommand{\\psfragscaletext}{}\n"
    "\\providecommand{\\psfragscalemath}{}\n"
    "\\providecommand{\\psfragscalenumeric}{}\n"
)


def format_psfrag_line(entry: PsfragEntry) -> str:
    return (f"\\psfrag{{{entry.tag}}}[{entry.posn}][{entry.psposn}]"
            f"[{_fmt_num(entry.scale)}][{_fmt_num(entry.rot)}]{{{entry.body}}}")


def emit_tex(registry: TagRegistry) -> str:
    """Serialize the registry: header, hook defaults, one line per entry.

    \\providecommand keeps the defaults overridable: user \\newcommand
    bindings made before the \\input win. All four optional arguments are
    always written so output is byte-deterministic.
    """
    lines = [_TEX_HEADER, _PROVIDES]
    for entry in registry.entries():
        lines.append(format_psfrag_line(entry) + "\n")
    return "".join(lines)


def parse_psfrag_line(line: str) -> PsfragEntry | None:
    """Parse one `\\psfrag{tag}[posn][psposn][scale][rot]{body}` line."""
    stripped = line.strip()
    if not stripped.startswith("\\psfrag{"):
        return None
    i = len("\\psfrag{")
    close = stripped.find("}", i)
    if close < 0:
        return None
    tag = stripped[i:close]
    i = close + 1
    options: list[str] = []
    while len(options) < 4 and i < len(stripped) and stripped[i] == "[":
        end = stripped.find("]", i)
        if end < 0:
            return None
        options.append(stripped[i + 1:end])
        i = end + 1
    if i >= len(stripped) or stripped[i] != "{":
        return None
    depth = 0
    body_start = i + 1
    body_end = len(stripped)
    for j in range(i, len(stripped)):
        if stripped[j] == "{":
            depth += 1
        elif stripped[j] == "}":
            depth -= 1
            if depth == 0:
                body_end = j
                break
    body = stripped[body_start:body_end]
    posn = PosCode.parse(options[0]) if len(options) > 0 and options[0] else FALLBACK_POSITION
    psposn = PosCode.parse(options[1]) if len(options) > 1 and options[1] else posn
    scale = float(options[2]) if len(options) > 2 and options[2] else 1.0
    rot = float(options[3]) if len(options) > 3 and options[3] else 0.0
    return PsfragEntry(tag=tag, posn=posn, psposn=psposn, scale=scale, rot=rot, body=body)


def parse_psfrag_document(text: str) -> TagRegistry:
    """Collect all psfrag lines of a .tex file into a registry."""
    registry = TagRegistry()
    for lineno, line in enumerate(text.splitlines(), start=1):
        entry = parse_psfrag_line(line)
        if entry is not None:
            registry.add(entry, origin=f"line {lineno}")
    return registry


def psfrag_export(scene: Scene,
                  basename: str | Path,
                  opts: ExportOptions = ExportOptions(),
                  hooks: HookSet = EMPTY_HOOKS,
                  ) -> tuple[bytes, str, TagRegistry]:
    """Export a scene to `basename+eps_suffix` and `basename+tex_suffix`.

    Pipeline: decorations are expanded (so directive-carrying tick labels
    stay taggable even with automatic positioning off), bare text is
    auto-wrapped when enabled, one entry is built per directive-bearing
    text primitive, tags are optionally renumbered, and both files are
    written atomically. Bare text primitives that remain are drawn as
    plain PostScript text and not tagged.
    """
    if not str(basename):
        raise ValueError("basename must be nonempty")
    working = expand_decorations(scene)
    if opts.effective_auto_convert:
        working = auto_wrap(working)

    registry = TagRegistry()
    text_prims = working.text_primitives()
    tag_of_index: dict[int, str] = {}
    for idx, prim in enumerate(text_prims):
        directive = prim.directive
        if directive is None:
            continue
        entry = build_entry(directive, prim.anchor, hooks, opts, registry)
        tag_of_index[idx] = entry.tag

    if opts.renumber_tags:
        registry, tag_map = renumber(registry)
        tag_of_index = {idx: tag_map[tag] for idx, tag in tag_of_index.items()}

    eps_bytes, _placements = epsio.write_eps(working, tag_of_index)
    tex_text = emit_tex(registry)

    base = str(basename)
    atomic_write_bytes(base + opts.eps_suffix, eps_bytes)
    atomic_write_text(base + opts.tex_suffix, tex_text)
    return eps_bytes, tex_text, registry
