# tests/cli_check.py
#
# End-to-end checks of the dysflux tool.
#   cli_check.py <dysflux binary> <schemas dir> {schemas,determinism,errors}

import filecmp
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

BIN, SCHEMAS, MODE = sys.argv[1], pathlib.Path(sys.argv[2]), sys.argv[3]

# Output file name patterns and the schema each must satisfy.
PATTERNS = [
    ("manifest.json", "manifest"),
    ("config.json", "config"),
    ("*_report.json", "report"),
    ("*.clean.json", "clean_alignment"),
    ("*.truth.json", "truth"),
    ("*.hyp.json", "hypothesis"),
    ("*.alignment.json", "alignment"),
    ("*.words.json", "words"),
    ("*.events.json", "events"),
    ("evaluation.json", "evaluation"),
]

NOISY_CONFIG = {"simulate": {"noise": 0.3, "block": [0.3, 0.6], "repetition_rate": 0.1,
                             "missing_rate": 0.1, "block_rate": 0.1}}


def run(*args, expect=0):
    p = subprocess.run([BIN, *args], capture_output=True, text=True)
    if p.returncode != expect:
        sys.exit(f"{' '.join(args)}: exit {p.returncode}, expected {expect}\n{p.stderr}")
    return p


def check(cond, msg):
    if not cond:
        sys.exit("FAIL: " + msg)


def schema(name):
    with open(SCHEMAS / f"{name}.schema.json") as f:
        s = json.load(f)
    jsonschema.Draft202012Validator.check_schema(s)
    return jsonschema.Draft202012Validator(s)


def validate_tree(root):
    validators = {name: schema(name) for _, name in PATTERNS}
    counts = {name: 0 for _, name in PATTERNS}
    for path in sorted(root.rglob("*.json")):
        matched = [name for pat, name in PATTERNS if path.match(pat)]
        check(len(matched) == 1, f"{path} matches {matched}")
        with open(path) as f:
            doc = json.load(f)
        errors = sorted(validators[matched[0]].iter_errors(doc), key=lambda e: e.path)
        check(not errors, f"{path}: {errors[0].message if errors else ''}")
        counts[matched[0]] += 1
    for name, n in counts.items():
        check(n > 0, f"no {name} output was produced")
    print("validated:", ", ".join(f"{k}={v}" for k, v in counts.items()))


def write_config(tmp):
    path = tmp / "config.json"
    path.write_text(json.dumps(NOISY_CONFIG))
    return str(path)


def mode_schemas(tmp):
    cfg = write_config(tmp)
    run("run", "--config", cfg, "--out", str(tmp / "out"), "--seed", "3", "--count", "12")
    validate_tree(tmp / "out")
    # A hypothesis directory given with --hyp, and a single-file table.
    corpus = tmp / "out" / "corpus"
    run("detect", "--manifest", str(corpus / "manifest.json"), "--out", str(tmp / "det"),
        "--hyp", str(corpus))
    table = {}
    for p in corpus.glob("*.hyp.json"):
        doc = json.loads(p.read_text())
        table[doc["utterance_id"]] = doc["words"]
    (tmp / "hyps.json").write_text(json.dumps(table))
    run("detect", "--manifest", str(corpus / "manifest.json"), "--out", str(tmp / "det2"),
        "--hyp", str(tmp / "hyps.json"))
    for a in sorted((tmp / "det").glob("*.events.json")):
        check(a.read_bytes() == (tmp / "det2" / a.name).read_bytes(), f"{a.name} differs by --hyp form")
        check(a.read_bytes() == (tmp / "out" / "pred" / a.name).read_bytes(),
              f"{a.name} differs between run and detect")


def mode_determinism(tmp):
    cfg = write_config(tmp)
    for name in ("a", "b"):
        run("run", "--config", cfg, "--out", str(tmp / name), "--seed", "11", "--count", "20",
            "--workers", "1")
    cmp = filecmp.dircmp(tmp / "a", tmp / "b")

    def same(d):
        check(not d.left_only and not d.right_only, f"trees differ: {d.left_only} {d.right_only}")
        _, mismatch, errors = filecmp.cmpfiles(d.left, d.right, d.common_files, shallow=False)
        check(not mismatch and not errors, f"files differ: {mismatch} {errors}")
        for sub in d.subdirs.values():
            same(sub)

    same(cmp)
    # More workers: identical content apart from the recorded worker count.
    run("run", "--config", cfg, "--out", str(tmp / "c"), "--seed", "11", "--count", "20",
        "--workers", "4")
    for p in sorted((tmp / "a").rglob("*")):
        if p.is_file() and p.name != "config.json":
            q = tmp / "c" / p.relative_to(tmp / "a")
            check(p.read_bytes() == q.read_bytes(), f"{q} differs with 4 workers")
    print("determinism ok")


def mode_errors(tmp):
    # Empty manifest: success, no per-utterance outputs.
    (tmp / "empty.json").write_text("[]")
    run("align", "--manifest", str(tmp / "empty.json"), "--out", str(tmp / "e"))
    check(sorted(p.name for p in (tmp / "e").iterdir()) == ["align_report.json"], "empty manifest outputs")

    # count = 0 gives an empty manifest.
    run("simulate", "--out", str(tmp / "s0"), "--count", "0")
    check(json.loads((tmp / "s0" / "manifest.json").read_text()) == [], "count=0 manifest")

    run("simulate", "--out", str(tmp / "s"), "--count", "5", "--seed", "1")
    manifest = tmp / "s" / "manifest.json"
    check(len(json.loads(manifest.read_text())) == 5, "count=5 manifest")

    # Corrupt emission magic: exit 2, error entry naming the file, others processed.
    bad = tmp / "s" / "utt00001.emission.bin"
    data = bytearray(bad.read_bytes())
    data[0:4] = b"JUNK"
    bad.write_bytes(bytes(data))
    # Missing hypothesis: warning, phoneme events only.
    (tmp / "s" / "utt00002.hyp.json").unlink()
    run("detect", "--manifest", str(manifest), "--out", str(tmp / "d"), expect=2)
    report = json.loads((tmp / "d" / "detect_report.json").read_text())
    check(report["succeeded"] == 4, "other utterances still processed")
    check(len(report["errors"]) == 1 and "utt00001.emission.bin" in report["errors"][0]["message"],
          "error entry names the corrupt file")
    check(report["warnings"][0]["utterance_id"] == "utt00002", "missing hypothesis warning")
    ev = json.loads((tmp / "d" / "utt00002.events.json").read_text())
    check(ev["refreshed"] is None and ev["word_events"] == [], "phoneme-only output")
    ev = json.loads((tmp / "d" / "utt00003.events.json").read_text())
    check(ev["refreshed"] is not None, "word-level output with a hypothesis")

    # Evaluate with a missing prediction and a stray one.
    run("align", "--manifest", str(manifest), "--out", str(tmp / "d"), expect=2)
    (tmp / "d" / "zzz.events.json").write_text("{}")
    run("evaluate", "--manifest", str(manifest), "--pred", str(tmp / "d"), "--out", str(tmp / "v"))
    ev = json.loads((tmp / "v" / "evaluation.json").read_text())
    check(ev["skipped"] == ["utt00001", "zzz"], f"skipped list {ev['skipped']}")
    check(ev["aggregate"]["utterances"] == 4, "evaluated count")

    # Usage and data errors.
    run("align", "--out", str(tmp / "x"), expect=1)
    run("bogus", expect=1)
    run("align", "--manifest", str(tmp / "missing.json"), "--out", str(tmp / "x"), expect=2)
    (tmp / "badcfg.json").write_text('{"thresholds": {"assign": 2}}')
    run("simulate", "--config", str(tmp / "badcfg.json"), "--out", str(tmp / "x"), expect=2)
    print("error handling ok")


with tempfile.TemporaryDirectory() as d:
    {"schemas": mode_schemas, "determinism": mode_determinism, "errors": mode_errors}[MODE](
        pathlib.Path(d))
