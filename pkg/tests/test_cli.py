import json
import subprocess
import sys

import numpy as np
import pytest

from visreplay.cli import EXIT_CONFIG, EXIT_IO, main
from visreplay.imaging import write_png


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def stderr_of(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().err


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_corpus")
    assert main(["gen-corpus", "--out", str(root), "--profiles", "D4,D5",
                 "--pages", "settings_main,settings_display"]) == 0
    return root


def frame(corpus, page, profile, k=0):
    sets = json.loads((corpus / "frame_sets.json").read_text())
    s = next(s for s in sets if s["page"] == page and s["profile"] == profile)
    return str(corpus / f"{s['frames'][k]}.png")


def test_gen_corpus_reports_frame_sets(corpus, capsys, tmp_path):
    code, doc = run(capsys, "gen-corpus", "--out", str(tmp_path), "--profiles", "D5", "--pages", "shop_done")
    assert code == 0 and doc["frame_sets"] == 1
    assert (tmp_path / "manifest.json").is_file() and (tmp_path / "fixture.json").is_file()


def test_unknown_profile_is_a_config_error(capsys, tmp_path):
    code, err = stderr_of(capsys, "gen-corpus", "--out", str(tmp_path), "--profiles", "D4,D99")
    assert code == EXIT_CONFIG and "D99" in err


def test_bad_config(capsys, tmp_path):
    img = tmp_path / "blank.png"
    write_png(np.full((100, 80, 3), 255, np.uint8), img)
    for text in ("not json", json.dumps({"match": {"embed_threshold": 2}}), json.dumps({"nope": 1})):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(text)
        assert main(["detect", str(img), "--profile", "D5", "--config", str(cfg)]) == EXIT_CONFIG
    assert main(["detect", str(img), "--profile", "D5", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    assert main(["detect", str(img), "--profile", "D5", "--gui-match-fraction", "0"]) == EXIT_CONFIG


def test_detect_blank_png_gives_no_widgets(capsys, tmp_path):
    img = tmp_path / "blank.png"
    write_png(np.full((800, 480, 3), 255, np.uint8), img)
    code, doc = run(capsys, "detect", str(img), "--profile", "D5", "--out", str(tmp_path), "--overlay")
    assert code == 0 and doc["widgets"] == []
    assert json.loads((tmp_path / "blank.detect.json").read_text()) == doc
    assert (tmp_path / "blank.overlay.png").is_file()


def test_detect_missing_image_is_an_io_error(capsys, tmp_path):
    assert main(["detect", str(tmp_path / "none.png"), "--profile", "D5"]) == EXIT_IO
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"not a png")
    assert main(["detect", str(bad), "--profile", "D5"]) == EXIT_IO


def test_detect_rendered_frame_with_overlay(corpus, capsys, tmp_path):
    img = frame(corpus, "settings_main", "D5")
    code, doc = run(capsys, "detect", img, "--profile", "D5", "--fixture", str(corpus / "fixture.json"),
                    "--out", str(tmp_path), "--overlay")
    assert code == 0 and len(doc["widgets"]) > 5
    assert any(w["kind"] == "Text" and w["text"] for w in doc["widgets"])
    over = next(tmp_path.glob("*.overlay.png"))
    assert over.stat().st_size > 0


def test_match_widget_self_match(corpus, capsys, tmp_path):
    img = frame(corpus, "settings_display", "D4")
    fx = str(corpus / "fixture.json")
    base = [img, img, "--source-profile", "D4", "--target-profile", "D4", "--fixture", fx, "--out", str(tmp_path)]
    for i in (0, 3):
        code, doc = run(capsys, "match-widget", *base, "--widget", str(i))
        assert code == 0 and doc["matched_widget"] == i
        assert doc["matched_bbox"] == doc["source_bbox"]
    t, l, b, r = doc["source_bbox"]
    code, by_point = run(capsys, "match-widget", *base, "--point", f"{(l + r) // 2},{(t + b) // 2}")
    assert code == 0 and by_point["matched_bbox"] == doc["source_bbox"]
    assert main(["match-widget", *base, "--widget", "999"]) == EXIT_CONFIG


def test_match_gui_corresponding_frames(corpus, capsys, tmp_path):
    fx = str(corpus / "fixture.json")
    a, b = frame(corpus, "settings_main", "D5"), frame(corpus, "settings_main", "D4")
    code, doc = run(capsys, "match-gui", a, b, "--profile-a", "D5", "--profile-b", "D4",
                    "--fixture", fx, "--out", str(tmp_path), "--overlay")
    assert code == 0 and doc["matched"] is True
    assert (doc["small"], doc["large"]) == ("D5", "D4")
    assert (tmp_path / "match_gui.json").is_file() and (tmp_path / "gui_small.overlay.png").is_file()
    c = frame(corpus, "settings_display", "D4")
    code, doc = run(capsys, "match-gui", a, c, "--profile-a", "D5", "--profile-b", "D4", "--fixture", fx,
                    "--out", str(tmp_path))
    assert code == 0 and doc["matched"] is False


def test_record_writes_records(capsys, tmp_path):
    code, doc = run(capsys, "record", "--only", "display_theme", "--out", str(tmp_path))
    assert code == 0 and doc == {"cases": 1, "actions": 4}
    lines = (tmp_path / "records.jsonl").read_text().splitlines()
    assert len(lines) == 4 and json.loads(lines[0])["case"] == "display_theme"
    assert main(["record", "--only", "no_such_case", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_replay_is_deterministic_and_transport_neutral(capsys, tmp_path):
    runs = {}
    for name, extra in (("a", []), ("b", []), ("c", ["--transport", "loopback"])):
        out = tmp_path / name
        code, doc = run(capsys, "replay", "--only", "display_theme", "--profiles", "D4,D5",
                        "--out", str(out), *extra)
        assert code == 0
        assert doc["testcase_accuracy"]["zero_correction"]["accuracy"] == 1.0
        runs[name] = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
    assert runs["a"] == runs["b"] == runs["c"]
    assert {"replay_logs.jsonl", "testcases.json", "replay.csv", "replay_report.json"} <= set(runs["a"])


def test_replay_case_file(capsys, tmp_path):
    from visreplay.suite import build_suite
    tc = next(c for c in build_suite() if c.name == "display_theme")
    path = tc.save(tmp_path / "case.json")
    code, doc = run(capsys, "replay", "--case", str(path), "--profiles", "D5", "--out", str(tmp_path / "o"))
    assert code == 0 and doc["profiles"] == ["D5", "D4"]


def test_eval_is_verified_and_reproducible(corpus, capsys, tmp_path):
    reports = []
    for name in ("a", "b"):
        out = tmp_path / name
        code, doc = run(capsys, "eval", "--corpus", str(corpus), "--out", str(out), "--seed", "3")
        assert code == 0 and doc["verified"] is True and doc["mismatched"] == []
        reports.append((out / "report.json").read_bytes())
    assert reports[0] == reports[1]
    rep = json.loads(reports[0])
    assert rep["widget_match_accuracy"]["multimodal"]["D4"]["D5"]["accuracy"] >= 0.9


def test_global_flags_after_verb(capsys, tmp_path):
    code, doc = run(capsys, "gen-corpus", "--pages", "shop_done", "--profiles", "D5", "--seed", "2",
                    "--out", str(tmp_path / "x"))
    code2, doc2 = run(capsys, "--seed", "2", "--out", str(tmp_path / "y"), "--profiles", "D5",
                      "gen-corpus", "--pages", "shop_done")
    assert code == code2 == 0 and doc == doc2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "visreplay.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("visreplay ")
    res = subprocess.run([sys.executable, "-m", "visreplay.cli", "bogus"], capture_output=True, text=True)
    assert res.returncode == 2
