"""Command-line front end: export, inspect, renumber, preview.

Exit codes: 0 success, 1 parse error, 2 semantic error, 3 I/O failure.
Every failing path writes no output files; in-place commands always keep
.bak copies of the originals.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

from .epsio import RewriteError, ScanError, TokenizeError, rewrite_tags, scan_tags
from .exprkit import EMPTY_HOOKS, ExprSyntaxError
from .fileio import atomic_write_bytes, atomic_write_text, make_backup
from .labeling import (DuplicateTagError, parse_psfrag_document, psfrag_export,
                       renumber)
from .preview import UnmatchedTagWarning, substitute_preview
from .scene import ExportOptions
from .scenefile import SceneFormatError, load_hooks, load_scene

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_SEMANTIC = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labelforge",
        description="Export plot scenes to tagged EPS plus psfrag macros.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_export = sub.add_parser("export", help="export a scene file")
    p_export.add_argument("scene", help="scene document (JSON)")
    p_export.add_argument("--basename", required=True,
                          help="output base name; suffixes are appended")
    p_export.add_argument("--tex-suffix", default="-psfrag.tex")
    p_export.add_argument("--eps-suffix", default="-psfrag.eps")
    p_export.add_argument("--renumber-tags", action="store_true")
    p_export.add_argument("--no-auto-convert", action="store_true",
                          help="tag only manually marked labels")
    p_export.add_argument("--no-auto-position", action="store_true",
                          help="ignore anchors; implies --no-auto-convert")
    p_export.add_argument("--hooks", default=os.environ.get("LABELFORGE_HOOKS"),
                          help="hook definition file (default: $LABELFORGE_HOOKS)")
    p_export.set_defaults(func=cmd_export)

    p_inspect = sub.add_parser("inspect", help="list tag occurrences in an EPS")
    p_inspect.add_argument("eps")
    p_inspect.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p_inspect.set_defaults(func=cmd_inspect)

    p_renumber = sub.add_parser("renumber",
                                help="renumber tags in an EPS/tex pair in place")
    p_renumber.add_argument("eps")
    p_renumber.add_argument("tex")
    p_renumber.set_defaults(func=cmd_renumber)

    p_preview = sub.add_parser("preview",
                               help="substitute placeholder boxes for tags")
    p_preview.add_argument("eps")
    p_preview.add_argument("tex")
    p_preview.add_argument("out")
    p_preview.add_argument("--strict", action="store_true",
                           help="fail on any unmatched tag in either direction")
    p_preview.set_defaults(func=cmd_preview)
    return parser


def cmd_export(args: argparse.Namespace) -> int:
    scene = load_scene(args.scene)
    hooks = load_hooks(args.hooks) if args.hooks else EMPTY_HOOKS
    opts = ExportOptions(
        tex_suffix=args.tex_suffix,
        eps_suffix=args.eps_suffix,
        renumber_tags=args.renumber_tags,
        auto_convert_text=not args.no_auto_convert,
        auto_position=not args.no_auto_position,
    )
    eps_bytes, _tex, registry = psfrag_export(scene, args.basename, opts, hooks)
    total = len(scan_tags(eps_bytes))
    print(f"{total} labels, {len(registry)} tagged")
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    occurrences = scan_tags(Path(args.eps).read_bytes())
    if args.format == "json":
        print(json.dumps([
            {"tag": occ.tag,
             "x": round(occ.device_position[0], 3),
             "y": round(occ.device_position[1], 3),
             "rot": round(occ.rotation, 3),
             "scale": round(occ.scale, 3)}
            for occ in occurrences]))
    else:
        for occ in occurrences:
            print(f"{occ.tag}\t{occ.device_position[0]:.3f}\t{occ.device_position[1]:.3f}"
                  f"\t{occ.rotation:.3f}\t{occ.scale:.3f}")
    return EXIT_OK


def _retag_psfrag_line(line: str, tag_map: dict[str, str]) -> str:
    marker = "\\psfrag{"
    idx = line.find(marker)
    if idx < 0:
        return line
    start = idx + len(marker)
    close = line.find("}", start)
    if close < 0:
        return line
    tag = line[start:close]
    if tag not in tag_map:
        return line
    return line[:start] + tag_map[tag] + line[close:]


def cmd_renumber(args: argparse.Namespace) -> int:
    eps_path, tex_path = Path(args.eps), Path(args.tex)
    eps_data = eps_path.read_bytes()
    tex_text = tex_path.read_text(encoding="utf-8")
    registry = parse_psfrag_document(tex_text)
    eps_tags = {occ.tag for occ in scan_tags(eps_data)}
    missing = [tag for tag in registry.tags() if tag not in eps_tags]
    if missing:
        print(f"error: tex tags not present in EPS: {', '.join(missing)}",
              file=sys.stderr)
        return EXIT_SEMANTIC
    _renumbered, tag_map = renumber(registry)
    new_eps = rewrite_tags(eps_data, tag_map)
    new_tex = "".join(_retag_psfrag_line(line, tag_map)
                      for line in tex_text.splitlines(keepends=True))
    make_backup(eps_path)
    make_backup(tex_path)
    atomic_write_bytes(eps_path, new_eps)
    atomic_write_text(tex_path, new_tex)
    print(f"renumbered {len(tag_map)} tags")
    return EXIT_OK


def cmd_preview(args: argparse.Namespace) -> int:
    eps_data = Path(args.eps).read_bytes()
    registry = parse_psfrag_document(Path(args.tex).read_text(encoding="utf-8"))
    occurrences = scan_tags(eps_data)
    shown = {occ.tag for occ in occurrences}
    matched = sum(1 for occ in occurrences if registry.get(occ.tag) is not None)
    stale = [tag for tag in registry.tags() if tag not in shown]
    unmatched = sorted({occ.tag for occ in occurrences
                        if registry.get(occ.tag) is None})
    if args.strict and (stale or unmatched):
        for tag in stale:
            print(f"error: entry {tag!r} matches nothing in the EPS", file=sys.stderr)
        for tag in unmatched:
            print(f"error: shown text {tag!r} has no entry", file=sys.stderr)
        return EXIT_SEMANTIC
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnmatchedTagWarning)
        out = substitute_preview(eps_data, registry)
    atomic_write_bytes(args.out, out)
    print(f"{matched} occurrences substituted")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SceneFormatError, ExprSyntaxError, TokenizeError, ScanError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DuplicateTagError, RewriteError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
