"""Versioned JSON scene documents and hook definition files.

The on-disk schema maps one to one onto the scene model; expressions are
written in the bracketed source syntax. Validation is strict: unknown
keys and version mismatches are rejected so fixtures stay honest.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .directives import LabelDirective, PosCode
from .exprkit import (BUILTIN_TRANSFORMS, Expr, ExprSyntaxError, HookSet,
                      LabelClass, parse_expr)
from .scene import (Arrow, CircleArc, DecorationSpec, FrameTicks, Gridlines,
                    Polyline, Scene, StrokeStyle, TextPrimitive, Tick)

SCENE_VERSION = 1


class SceneFormatError(ValueError):
    """The document does not conform to the scene or hooks schema."""


def _require_keys(obj: dict, allowed: set[str], required: set[str], what: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise SceneFormatError(f"unknown {what} keys: {', '.join(sorted(unknown))}")
    missing = required - set(obj)
    if missing:
        raise SceneFormatError(f"missing {what} keys: {', '.join(sorted(missing))}")


def _pair(value: Any, what: str) -> tuple[float, float]:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise SceneFormatError(f"{what} must be a pair of numbers")
    return float(value[0]), float(value[1])


def _expr(source: Any, what: str) -> Expr:
    if not isinstance(source, str):
        raise SceneFormatError(f"{what} must be an expression string")
    try:
        return parse_expr(source)
    except ExprSyntaxError as exc:
        raise SceneFormatError(f"bad expression in {what}: {exc}") from exc


def _style(obj: Any) -> StrokeStyle:
    if obj is None:
        return StrokeStyle()
    if not isinstance(obj, dict):
        raise SceneFormatError("style must be an object")
    _require_keys(obj, {"width", "dash", "gray", "hue"}, set(), "style")
    dash = None
    if obj.get("dash") is not None:
        dash = _pair(obj["dash"], "style dash")
    return StrokeStyle(
        width=float(obj.get("width", 1.0)),
        dash=dash,
        gray=None if obj.get("gray") is None else float(obj["gray"]),
        hue=None if obj.get("hue") is None else float(obj["hue"]),
    )


def _directive(expr: Expr, obj: Any) -> LabelDirective:
    if not isinstance(obj, dict):
        raise SceneFormatError("psfrag override must be an object")
    _require_keys(obj, {"position", "ps_position", "tex", "tag", "rotation", "scaling"},
                  set(), "psfrag override")
    scaling = obj.get("scaling")
    if scaling in (None, "auto"):
        scaling_value = None
    elif isinstance(scaling, (int, float)) and not isinstance(scaling, bool):
        scaling_value = float(scaling)
    else:
        raise SceneFormatError(f"scaling must be a number or \"auto\": {scaling!r}")
    try:
        return LabelDirective(
            expr=expr,
            tex_command=obj.get("tex"),
            psfrag_tag=obj.get("tag"),
            position=PosCode.parse(obj["position"]) if obj.get("position") else None,
            ps_position=PosCode.parse(obj["ps_position"]) if obj.get("ps_position") else None,
            rotation=float(obj.get("rotation", 0.0)),
            scaling=scaling_value,
        )
    except ValueError as exc:
        raise SceneFormatError(str(exc)) from exc


def _label(obj: Any, what: str):
    """A label is an expression string or {"expr": ..., "psfrag": {...}}."""
    if isinstance(obj, str):
        return _expr(obj, what)
    if isinstance(obj, dict):
        _require_keys(obj, {"expr", "psfrag"}, {"expr"}, what)
        expr = _expr(obj["expr"], what)
        if "psfrag" in obj:
            return _directive(expr, obj["psfrag"])
        return expr
    raise SceneFormatError(f"{what} must be a string or an object")


def _text_primitive(obj: dict) -> TextPrimitive:
    _require_keys(obj, {"type", "expr", "pos", "anchor", "dir", "psfrag"},
                  {"type", "expr", "pos"}, "text primitive")
    expr = _expr(obj["expr"], "text primitive")
    content: Expr | LabelDirective = expr
    if "psfrag" in obj:
        content = _directive(expr, obj["psfrag"])
    direction = (1.0, 0.0)
    if "dir" in obj:
        dx, dy = _pair(obj["dir"], "text dir")
        norm = (dx * dx + dy * dy) ** 0.5
        if norm == 0:
            raise SceneFormatError("text dir must be nonzero")
        direction = (dx / norm, dy / norm)
    try:
        return TextPrimitive(
            content=content,
            position=_pair(obj["pos"], "text pos"),
            anchor=_pair(obj["anchor"], "text anchor") if "anchor" in obj else (0.0, 0.0),
            direction=direction,
        )
    except ValueError as exc:
        raise SceneFormatError(str(exc)) from exc


def _primitive(obj: Any):
    if not isinstance(obj, dict) or "type" not in obj:
        raise SceneFormatError("each primitive must be an object with a type")
    kind = obj["type"]
    try:
        if kind == "polyline":
            _require_keys(obj, {"type", "points", "style"}, {"type", "points"}, "polyline")
            points = tuple(_pair(p, "polyline point") for p in obj["points"])
            return Polyline(points, style=_style(obj.get("style")))
        if kind == "circle":
            _require_keys(obj, {"type", "center", "radius", "arc", "style"},
                          {"type", "center", "radius"}, "circle")
            start, end = (0.0, 360.0)
            if "arc" in obj:
                start, end = _pair(obj["arc"], "circle arc")
            return CircleArc(_pair(obj["center"], "circle center"),
                             float(obj["radius"]), start, end,
                             style=_style(obj.get("style")))
        if kind == "arrow":
            _require_keys(obj, {"type", "from", "to", "style"}, {"type", "from", "to"}, "arrow")
            return Arrow(_pair(obj["from"], "arrow from"), _pair(obj["to"], "arrow to"),
                         style=_style(obj.get("style")))
        if kind == "text":
            return _text_primitive(obj)
    except SceneFormatError:
        raise
    except ValueError as exc:
        raise SceneFormatError(str(exc)) from exc
    raise SceneFormatError(f"unknown primitive type {kind!r}")


def _ticks(items: Any, edge: str) -> tuple[Tick, ...]:
    if not isinstance(items, list):
        raise SceneFormatError(f"{edge} ticks must be a list")
    ticks = []
    for item in items:
        if not isinstance(item, dict):
            raise SceneFormatError("each tick must be an object")
        _require_keys(item, {"value", "label", "psfrag"}, {"value", "label"}, "tick")
        label = _expr(item["label"], "tick label")
        content: Expr | LabelDirective = label
        if "psfrag" in item:
            content = _directive(label, item["psfrag"])
        ticks.append(Tick(value=float(item["value"]), label=content))
    return tuple(ticks)


def _decorations(obj: Any) -> DecorationSpec:
    if obj is None:
        return DecorationSpec()
    if not isinstance(obj, dict):
        raise SceneFormatError("decorations must be an object")
    _require_keys(obj, {"plot_label", "axes_labels", "frame_ticks", "gridlines"},
                  set(), "decorations")
    plot_label = _label(obj["plot_label"], "plot label") if obj.get("plot_label") else None
    axes_labels = None
    if obj.get("axes_labels") is not None:
        pair = obj["axes_labels"]
        if not isinstance(pair, list) or len(pair) != 2:
            raise SceneFormatError("axes_labels must be a two-element list")
        axes_labels = tuple(
            _label(item, "axis label") if item is not None else None for item in pair)
    frame_ticks = FrameTicks()
    if obj.get("frame_ticks") is not None:
        ft = obj["frame_ticks"]
        if not isinstance(ft, dict):
            raise SceneFormatError("frame_ticks must be an object")
        _require_keys(ft, {"bottom", "left", "top", "right"}, set(), "frame_ticks")
        try:
            frame_ticks = FrameTicks(**{edge: _ticks(items, edge) for edge, items in ft.items()})
        except ValueError as exc:
            raise SceneFormatError(str(exc)) from exc
    gridlines = Gridlines()
    if obj.get("gridlines") is not None:
        gl = obj["gridlines"]
        if not isinstance(gl, dict):
            raise SceneFormatError("gridlines must be an object")
        _require_keys(gl, {"x", "y"}, set(), "gridlines")
        gridlines = Gridlines(
            x=tuple(float(v) for v in gl.get("x", ())),
            y=tuple(float(v) for v in gl.get("y", ())),
        )
    return DecorationSpec(plot_label=plot_label, axes_labels=axes_labels,
                          frame_ticks=frame_ticks, gridlines=gridlines)


def parse_scene(text: str) -> Scene:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SceneFormatError("scene document must be a JSON object")
    _require_keys(doc, {"version", "plot_range", "size", "primitives", "decorations"},
                  {"version", "plot_range", "size"}, "scene")
    if doc["version"] != SCENE_VERSION:
        raise SceneFormatError(
            f"unsupported scene version {doc['version']!r} (expected {SCENE_VERSION})")
    pr = doc["plot_range"]
    if not isinstance(pr, list) or len(pr) != 2:
        raise SceneFormatError("plot_range must be [[xmin, xmax], [ymin, ymax]]")
    prims = doc.get("primitives", [])
    if not isinstance(prims, list):
        raise SceneFormatError("primitives must be a list")
    try:
        return Scene(
            plot_range=(_pair(pr[0], "x range"), _pair(pr[1], "y range")),
            target_size=_pair(doc["size"], "size"),
            primitives=tuple(_primitive(p) for p in prims),
            decorations=_decorations(doc.get("decorations")),
        )
    except SceneFormatError:
        raise
    except ValueError as exc:
        raise SceneFormatError(str(exc)) from exc


def load_scene(path: str | Path) -> Scene:
    return parse_scene(Path(path).read_text(encoding="utf-8"))


_CLASS_KEYS = {"text": LabelClass.TEXT, "math": LabelClass.MATH,
               "numeric": LabelClass.NUMERIC}


def parse_hooks(text: str) -> HookSet:
    """Hook file: named pre-apply transforms and post-replace pairs.

    {"pre_apply": {"math": ["hold"]},
     "post_replace": {"numeric": [["\\\\sqrt", "\\\\surd"]]}}
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SceneFormatError("hooks document must be a JSON object")
    _require_keys(doc, {"version", "pre_apply", "post_replace"}, set(), "hooks")
    if doc.get("version", 1) != 1:
        raise SceneFormatError(f"unsupported hooks version {doc['version']!r}")

    def class_of(key: str) -> LabelClass:
        cls = _CLASS_KEYS.get(key.lower())
        if cls is None:
            raise SceneFormatError(f"unknown label class {key!r}")
        return cls

    pre: dict[LabelClass, tuple] = {}
    for key, names in (doc.get("pre_apply") or {}).items():
        transforms = []
        for name in names:
            if name not in BUILTIN_TRANSFORMS:
                raise SceneFormatError(f"unknown transform {name!r} (have: "
                                       f"{', '.join(sorted(BUILTIN_TRANSFORMS))})")
            transforms.append(BUILTIN_TRANSFORMS[name])
        pre[class_of(key)] = tuple(transforms)
    post: dict[LabelClass, tuple] = {}
    for key, pairs in (doc.get("post_replace") or {}).items():
        converted = []
        for pair in pairs:
            if not (isinstance(pair, list) and len(pair) == 2
                    and all(isinstance(s, str) for s in pair)):
                raise SceneFormatError("post_replace entries must be [find, replace] pairs")
            converted.append((pair[0], pair[1]))
        post[class_of(key)] = tuple(converted)
    return HookSet(pre_apply=pre, post_replace=post)


def load_hooks(path: str | Path) -> HookSet:
    return parse_hooks(Path(path).read_text(encoding="utf-8"))
