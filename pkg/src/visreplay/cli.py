"""Command-line interface: ``visreplay <verb> [options]``.

Exit codes: 0 success, 1 harness failure (including a report that fails
verification), 2 bad configuration or arguments, 3 file or device I/O error.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from dataclasses import replace
from pathlib import Path

import jsonschema
from PIL import Image, ImageDraw

from . import __version__
from .corpus import build_catalog
from .detection import DetectConfig, SubprocessTextProvider, TextFixture, fixture_text_provider
from .devicefarm.device import SimulatedDevice
from .devicefarm.profiles import get_profile, parse_profiles
from .errors import ConfigError, DeviceIOError, TextProviderError, VisReplayError
from .evaluation import (Corpus, aggregate, eval_gui_matching, eval_replay, eval_widget_matching,
                         gen_corpus, verify_report, write_csvs, write_logs)
from .extraction import GuiSnapshot, WidgetKind
from .imaging import read_png
from .matching import MatchConfig, PairContext, match_gui_cross_device, match_widget, order_by_screen
from .replay import Perception, TestCase, perception_for, record_test_case
from .schemas import load_schema
from .suite import build_suite

DEFAULT_PROFILES = "D1,D3,D4,D5"
EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 1, 2, 3
KIND_COLORS = {WidgetKind.TEXT: (0, 90, 255), WidgetKind.NONTEXT: (230, 30, 30)}
CONTAINER_COLOR = (0, 170, 60)


def load_config(path: str | None) -> tuple[DetectConfig, MatchConfig]:
    if path is None:
        return DetectConfig(), MatchConfig()
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"config {path} is not JSON: {exc}") from exc
    try:
        jsonschema.validate(doc, load_schema("config"))
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config {path}: {exc.message}") from exc
    match = dict(doc.get("match", {}))
    if "area_ratio_band" in match:
        match["area_ratio_band"] = tuple(match["area_ratio_band"])
    return DetectConfig(**doc.get("detect", {})), MatchConfig(**match)


def _configs(args) -> tuple[DetectConfig, MatchConfig]:
    detect, match = load_config(args.config)
    if args.gui_match_fraction is not None:
        match = replace(match, gui_match_fraction=args.gui_match_fraction)
    return detect, match


def _profile_names(args) -> list[str]:
    return [p.name for p in parse_profiles(args.profiles or DEFAULT_PROFILES)]


def _out(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(obj, path: Path | None = None) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if path is not None:
        path.write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def _provider(args):
    if getattr(args, "fixture", None):
        return fixture_text_provider(TextFixture.load(args.fixture))
    if getattr(args, "ocr_cmd", None):
        return SubprocessTextProvider(shlex.split(args.ocr_cmd))
    return lambda img: []


def _read_image(path: str):
    try:
        return read_png(path)
    except (OSError, ValueError) as exc:
        raise DeviceIOError(f"cannot read image {path}: {exc}") from exc


def _snapshot(path: str, profile_name: str, args, detect_cfg: DetectConfig) -> GuiSnapshot:
    prof = get_profile(profile_name)
    return Perception(_provider(args), detect_cfg).snapshot(_read_image(path), prof)


def draw_overlay(snapshot: GuiSnapshot, path: Path, highlight: set[int] = frozenset()) -> Path:
    """Annotated copy of the snapshot image with every widget box drawn."""
    img = Image.fromarray(snapshot.image).convert("RGB")
    draw = ImageDraw.Draw(img)
    width = max(1, snapshot.width // 400)
    for i, w in enumerate(snapshot.raw):
        color = CONTAINER_COLOR if w.is_container else KIND_COLORS[w.kind]
        b = w.bbox
        draw.rectangle((b.left, b.top, b.right - 1, b.bottom - 1), outline=color,
                       width=width * 3 if i in highlight else width)
    img.save(path, format="PNG")
    return path


def _widget_rows(snapshot: GuiSnapshot) -> list[dict]:
    return [{"index": i, "bbox": list(w.bbox.as_tuple()), "kind": w.kind.value,
             "is_container": w.is_container, "text": w.text} for i, w in enumerate(snapshot.raw)]


# -- verbs ---------------------------------------------------------------------

def cmd_gen_corpus(args) -> int:
    manifest = gen_corpus(_out(args), build_catalog(), _profile_names(args), args.seed, args.pages)
    _emit({"frame_sets": len(manifest.pages) * len(manifest.profiles), **manifest.to_dict()})
    return 0


def cmd_detect(args) -> int:
    detect_cfg, _ = _configs(args)
    snap = _snapshot(args.image, args.profile, args, detect_cfg)
    out = _out(args)
    stem = Path(args.image).stem
    if args.overlay:
        draw_overlay(snap, out / f"{stem}.overlay.png")
    _emit({"image": args.image, "profile": args.profile, "widgets": _widget_rows(snap)},
          out / f"{stem}.detect.json")
    return 0


def cmd_match_widget(args) -> int:
    detect_cfg, cfg = _configs(args)
    src = _snapshot(args.source, args.source_profile, args, detect_cfg)
    tgt = _snapshot(args.target, args.target_profile, args, detect_cfg)
    if args.widget is not None:
        i = args.widget
        if not 0 <= i < len(src):
            raise ConfigError(f"source has {len(src)} widgets, no index {i}")
    else:
        x, y = (int(v) for v in args.point.split(","))
        i = src.widget_at(x, y)
        if i is None:
            raise ConfigError(f"no source widget under ({x}, {y})")
    res = match_widget(src, i, tgt, cfg, PairContext(src, tgt, cfg))
    out = _out(args)
    if args.overlay:
        draw_overlay(src, out / "match_source.overlay.png", {i})
        draw_overlay(tgt, out / "match_target.overlay.png", {res.matched} if res.matched is not None else set())
    row = res.log_entry(i)
    row["source_bbox"] = list(src.raw[i].bbox.as_tuple())
    row["matched_bbox"] = list(tgt.raw[res.matched].bbox.as_tuple()) if res.matched is not None else None
    _emit(row, out / "match_widget.json")
    return 0


def cmd_match_gui(args) -> int:
    detect_cfg, cfg = _configs(args)
    a = _snapshot(args.a, args.profile_a, args, detect_cfg)
    b = _snapshot(args.b, args.profile_b, args, detect_cfg)
    small, large = order_by_screen(a, b)
    gm = match_gui_cross_device(small, large, cfg)
    out = _out(args)
    if args.overlay:
        unmatched = {i for i, r in gm.results.items() if r.matched is None}
        draw_overlay(small, out / "gui_small.overlay.png", unmatched)
    _emit({"matched": gm.matched, "fraction": gm.fraction, "counted": gm.counted,
           "small": small.device.name, "large": large.device.name,
           "results": [json.loads(line) for line in gm.log_lines()]}, out / "match_gui.json")
    return 0


def _cases(args) -> list[TestCase]:
    if args.case:
        return [TestCase.load(p) for p in args.case]
    cases = build_suite()
    if args.only:
        wanted = set(args.only.split(","))
        cases = [c for c in cases if c.name in wanted]
        if not cases:
            raise ConfigError(f"no suite case named {args.only}")
    return cases


def cmd_record(args) -> int:
    detect_cfg, _ = _configs(args)
    app = build_catalog()
    out = _out(args)
    rows = []
    for tc in _cases(args):
        sim = SimulatedDevice(app, get_profile(tc.source_device), rng_seed=args.seed)
        for k, (rec, truth) in enumerate(record_test_case(tc, sim, perception_for(sim, detect_cfg))):
            rows.append({"case": tc.name, "index": k, **rec.to_dict(), "truth_key": truth.key})
    write_logs(rows, out / "records.jsonl")
    _emit({"cases": len({r["case"] for r in rows}), "actions": len(rows)})
    return 0


def cmd_replay(args) -> int:
    detect_cfg, cfg = _configs(args)
    cases = _cases(args)
    profiles = _profile_names(args)
    for tc in cases:
        if tc.source_device not in profiles:
            profiles.append(tc.source_device)
    reports, rows = eval_replay(cases, build_catalog(), profiles, cfg, args.seed, args.transport, detect_cfg)
    out = _out(args)
    write_logs(rows, out / "replay_logs.jsonl")
    (out / "testcases.json").write_text(json.dumps([r.to_dict() for r in reports], indent=1, sort_keys=True)
                                        + "\n", encoding="utf-8")
    report = aggregate(rows, profiles)
    write_csvs(report, out)
    _emit({k: report[k] for k in ("profiles", "action_accuracy", "testcase_accuracy")}, out / "replay_report.json")
    return 0


def cmd_eval(args) -> int:
    detect_cfg, cfg = _configs(args)
    out = _out(args)
    if args.corpus:
        corpus_dir = Path(args.corpus)
    else:
        corpus_dir = out / "corpus"
        gen_corpus(corpus_dir, build_catalog(), _profile_names(args), args.seed, args.pages)
    corpus = Corpus(corpus_dir, detect_cfg)
    profiles = corpus.manifest.profiles
    rows = eval_widget_matching(corpus, cfg, args.seed)
    rows += eval_gui_matching(corpus, cfg, args.seed)
    if args.replay:
        cases = [tc for tc in build_suite() if tc.source_device in profiles]
        rows += eval_replay(cases, build_catalog(), profiles, cfg, args.seed, "direct", detect_cfg)[1]
    log_path = write_logs(rows, out / "eval_logs.jsonl")
    report = aggregate(rows, profiles)
    (out / "report.json").write_text(json.dumps(report, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    write_csvs(report, out)
    bad = verify_report(report, log_path)
    _emit({"report": str(out / "report.json"), "verified": not bad, "mismatched": bad})
    return EXIT_FAIL if bad else 0


# -- parser ----------------------------------------------------------------------

def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--config", default=d(None), help="JSON config file (detect/match sections)")
    p.add_argument("--seed", type=int, default=d(0), help="seed for sampling and rendering")
    p.add_argument("--out", default=d(None), help="output directory (default: current directory)")
    p.add_argument("--profiles", default=d(None), help=f"comma-separated profiles (default {DEFAULT_PROFILES})")
    p.add_argument("--gui-match-fraction", type=float, default=d(None),
                   help="override match.gui_match_fraction")


def _text_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fixture", help="text fixture JSON (e.g. a corpus's fixture.json)")
    p.add_argument("--ocr-cmd", help="external OCR command: PNG on stdin, JSON text lines on stdout")
    p.add_argument("--overlay", action="store_true", help="also write annotated PNG overlays")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="visreplay", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen-corpus", help="render the page catalog on every profile")
    p.add_argument("--pages", type=lambda s: s.split(","), help="comma-separated page ids (default all)")
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("detect", help="detect widgets on one screenshot or photo")
    p.add_argument("image")
    p.add_argument("--profile", required=True)
    _text_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("match-widget", help="match one source widget on a target frame")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--source-profile", required=True)
    p.add_argument("--target-profile", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--widget", type=int, help="source widget index")
    g.add_argument("--point", help="x,y of a point inside the source widget")
    _text_flags(p)
    p.set_defaults(func=cmd_match_widget)

    p = sub.add_parser("match-gui", help="decide whether two frames show the same GUI")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--profile-a", required=True)
    p.add_argument("--profile-b", required=True)
    _text_flags(p)
    p.set_defaults(func=cmd_match_gui)

    for verb, func, text in (("record", cmd_record, "record test cases on their source profiles"),
                             ("replay", cmd_replay, "record and replay test cases on every profile")):
        p = sub.add_parser(verb, help=text)
        p.add_argument("--case", nargs="+", help="test case JSON files (default: the shipped suite)")
        p.add_argument("--only", help="comma-separated suite case names")
        if verb == "replay":
            p.add_argument("--transport", choices=("direct", "loopback"), default="direct")
        p.set_defaults(func=func)

    p = sub.add_parser("eval", help="matching (and optionally replay) evaluation with verified report")
    p.add_argument("--corpus", help="existing corpus directory (default: generate one under --out)")
    p.add_argument("--pages", type=lambda s: s.split(","), help="pages for a generated corpus")
    p.add_argument("--replay", action="store_true", help="also replay the shipped suite")
    p.set_defaults(func=cmd_eval)

    for p in sub.choices.values():
        _global_flags(p, suppress=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, DeviceIOError, TextProviderError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except VisReplayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
