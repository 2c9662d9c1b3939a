"""Listening-test manifests and score normalization.

One screen per (model, vowel). The rated stimuli are the selected pairs'
best candidates plus a hidden copy of the reference and a synthesized
anchor of a different vowel, shuffled deterministically per screen. The
visible reference is a separate, unrated stimulus. Raters return raw
scores in [0, 100]; normalization maps each rater's anchor to 0 and
hidden-reference score to 1, clipping negatives (scores above 1 pass
through unless configured otherwise).
"""

from __future__ import annotations

import json
import shutil
import time
import warnings
import zlib
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from .audio_io import read_json, write_json, write_wav
from .errors import ConfigError, DegenerateScreen, MissingResult
from .features import FeatureVariant
from .metrics import metric_from_name
from .targets import TargetSet, VOWEL_LABELS

ROLE_REFERENCE = "reference"
ROLE_HIDDEN_REFERENCE = "hidden_reference"
ROLE_ANCHOR = "anchor"
ROLE_CANDIDATE = "candidate"
RATED_ROLES = (ROLE_HIDDEN_REFERENCE, ROLE_ANCHOR, ROLE_CANDIDATE)

MANIFEST_FILENAME = "manifest.json"

# Anchor vowel for each screen vowel; always a different label.
ANCHOR_CYCLE = {"a": "e", "e": "i", "i": "o", "o": "u", "u": "a"}

# Ten pairs spanning the bases, both HF settings, normalization, and all four
# metrics, with extra weight on the workhorse cepstral features.
DEFAULT_SELECTED_PAIRS = (
    "logmel+mse",
    "logmel+cos",
    "logmel_hf+mse",
    "mfcc12+mse",
    "mfcc12+cos",
    "mfcc12+manhattan",
    "mfcc12_cmvn+mse",
    "mfcc12_hf+mse",
    "mfcc22+chebyshev",
    "mfcc22_cmvn+cos",
)


def pair_name(variant, metric) -> str:
    vname = variant if isinstance(variant, str) else variant.name
    mname = metric if isinstance(metric, str) else metric.value
    return f"{vname}+{mname}"


def parse_pair(name: str) -> tuple:
    try:
        vname, mname = name.split("+")
        return FeatureVariant.from_name(vname), metric_from_name(mname)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad pair descriptor {name!r}: {exc}") from exc


def _screen_rng(shuffle_seed: int, screen_id: str) -> np.random.Generator:
    return np.random.default_rng([shuffle_seed, zlib.crc32(screen_id.encode())])


def _best_row(rows: list, model: str, vowel: str, pair: str):
    variant, metric = parse_pair(pair)
    matches = [r for r in rows
               if r["model"] == model and r["vowel"] == vowel
               and r["variant"] == variant.name and r["metric"] == metric.value]
    if not matches:
        raise MissingResult(f"no optimization result for {pair} / {model} / {vowel}")
    return min(matches, key=lambda r: (r["feature_error"], r["run_id"], r["step_id"]))


def prepare_manifest(result_rows: list, dataset_dirs: dict, targets: TargetSet,
                     out_dir, selected_pairs=None, shuffle_seed: int = 9) -> dict:
    """Build the listening-test directory: manifest.json plus copied audio.

    ``dataset_dirs`` maps model name to the campaign directory holding the
    candidate wavs. Each screen's rated stimuli get neutral ids in shuffled
    order so nothing about a file name or position reveals its role; pairs
    that picked the same candidate yield separate stimulus entries.
    """
    rows = list(result_rows)
    pairs = list(selected_pairs) if selected_pairs is not None \
        else list(DEFAULT_SELECTED_PAIRS)
    if not pairs:
        raise ConfigError("need at least one selected pair")
    for p in pairs:
        parse_pair(p)
    models = sorted({r["model"] for r in rows})
    if not models:
        raise MissingResult("no optimization results supplied")
    for model in models:
        if model not in dataset_dirs:
            raise ConfigError(f"no dataset directory supplied for model {model!r}")
    out = Path(out_dir)
    audio_dir = out / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)

    screens = []
    for model in models:
        for vowel in VOWEL_LABELS:
            screen_id = f"{model}_{vowel}"
            target = targets.vowel(vowel)
            anchor = targets.vowel(ANCHOR_CYCLE[vowel])
            rated = []      # (role, pair or None, source spec)
            for pair in pairs:
                row = _best_row(rows, model, vowel, pair)
                src = Path(dataset_dirs[model]) / row["wav"]
                rated.append((ROLE_CANDIDATE, pair, ("copy", src)))
            rated.append((ROLE_HIDDEN_REFERENCE, None,
                          ("synth", target.audio, target.sample_rate_hz)))
            rated.append((ROLE_ANCHOR, None,
                          ("synth", anchor.audio, anchor.sample_rate_hz)))
            order = _screen_rng(shuffle_seed, screen_id).permutation(len(rated))
            stimuli = []
            for slot, src_idx in enumerate(order):
                role, pair, source = rated[src_idx]
                sid = f"s{slot:02d}"
                wav_rel = f"audio/{screen_id}_{sid}.wav"
                if source[0] == "copy":
                    shutil.copyfile(source[1], out / wav_rel)
                else:
                    write_wav(out / wav_rel, source[1], source[2])
                entry = {"id": sid, "wav": wav_rel, "role": role}
                if pair is not None:
                    entry["pair"] = pair
                stimuli.append(entry)
            ref_rel = f"audio/{screen_id}_ref.wav"
            write_wav(out / ref_rel, target.audio, target.sample_rate_hz)
            stimuli.append({"id": "ref", "wav": ref_rel, "role": ROLE_REFERENCE})
            screens.append({"screen_id": screen_id, "model": model, "vowel": vowel,
                            "seed": shuffle_seed, "stimuli": stimuli})
    manifest = {"schema": 1, "screens": screens}
    write_json(manifest, out / MANIFEST_FILENAME)
    return manifest


def validate_manifest(manifest: dict) -> None:
    if not isinstance(manifest, dict) or manifest.get("schema") != 1:
        raise ConfigError("manifest schema must be 1")
    screens = manifest.get("screens")
    if not isinstance(screens, list) or not screens:
        raise ConfigError("manifest needs a non-empty screens list")
    seen_screens = set()
    for screen in screens:
        sid = screen.get("screen_id")
        if not sid or sid in seen_screens:
            raise ConfigError(f"missing or duplicate screen_id: {sid!r}")
        seen_screens.add(sid)
        for key in ("model", "vowel", "seed", "stimuli"):
            if key not in screen:
                raise ConfigError(f"screen {sid}: missing key {key!r}")
        roles = {}
        ids = set()
        for st in screen["stimuli"]:
            for key in ("id", "wav", "role"):
                if key not in st:
                    raise ConfigError(f"screen {sid}: stimulus missing {key!r}")
            if st["id"] in ids:
                raise ConfigError(f"screen {sid}: duplicate stimulus id {st['id']}")
            ids.add(st["id"])
            roles.setdefault(st["role"], []).append(st)
            if st["role"] == ROLE_CANDIDATE and "pair" not in st:
                raise ConfigError(f"screen {sid}: candidate without a pair")
        for role in (ROLE_REFERENCE, ROLE_HIDDEN_REFERENCE, ROLE_ANCHOR):
            if len(roles.get(role, [])) != 1:
                raise ConfigError(f"screen {sid}: needs exactly one {role}")
        if not roles.get(ROLE_CANDIDATE):
            raise ConfigError(f"screen {sid}: needs at least one candidate")


def rated_stimuli(screen: dict) -> list:
    return [st for st in screen["stimuli"] if st["role"] in RATED_ROLES]


def _check_score_set(score_set: dict, screen: dict) -> dict:
    scores = score_set.get("scores")
    if not isinstance(scores, dict):
        raise ConfigError(f"score set for {score_set.get('screen_id')}: scores must "
                          "map stimulus ids to numbers")
    expected = {st["id"] for st in rated_stimuli(screen)}
    got = set(scores)
    if got != expected:
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        raise ConfigError(
            f"screen {screen['screen_id']} rater {score_set.get('rater_id')}: "
            f"scores must cover the rated stimuli exactly "
            f"(missing {missing}, unknown {extra})")
    clean = {}
    for sid, value in scores.items():
        v = float(value)
        if not 0.0 <= v <= 100.0:
            raise ConfigError(
                f"screen {screen['screen_id']} stimulus {sid}: score {v} "
                "outside [0, 100]")
        clean[sid] = v
    return clean


def normalize_scores(score_sets: list, manifest: dict,
                     clip_above_one: bool = False) -> dict:
    """Map raw scores through each rater's own anchor/reference span.

    Returns {"rows": [...], "excluded": [...]}; a screen where a rater gave
    the anchor and the hidden reference the same raw score normalizes to
    nothing and is excluded with a warning. The map is invariant to any
    positive affine transform of a rater's raw scores on a screen.
    """
    validate_manifest(manifest)
    screens = {s["screen_id"]: s for s in manifest["screens"]}
    rows = []
    excluded = []
    seen = set()
    for score_set in score_sets:
        rater = score_set.get("rater_id")
        sid = score_set.get("screen_id")
        if rater is None or sid is None:
            raise ConfigError("each score set needs rater_id and screen_id")
        if sid not in screens:
            raise ConfigError(f"score set references unknown screen {sid!r}")
        key = (rater, sid)
        if key in seen:
            raise ConfigError(f"duplicate score set for rater {rater} screen {sid}")
        seen.add(key)
        screen = screens[sid]
        scores = _check_score_set(score_set, screen)
        by_role = {st["role"]: st for st in screen["stimuli"]}
        raw_ref = scores[by_role[ROLE_HIDDEN_REFERENCE]["id"]]
        raw_anchor = scores[by_role[ROLE_ANCHOR]["id"]]
        if raw_ref == raw_anchor:
            err = DegenerateScreen(
                f"rater {rater} screen {sid}: hidden reference and anchor both "
                f"scored {raw_ref}")
            warnings.warn(str(err))
            excluded.append({"rater_id": rater, "screen_id": sid,
                             "reason": str(err)})
            continue
        span = raw_ref - raw_anchor
        for st in rated_stimuli(screen):
            raw = scores[st["id"]]
            norm = (raw - raw_anchor) / span
            if norm < 0.0:
                norm = 0.0
            if clip_above_one and norm > 1.0:
                norm = 1.0
            rows.append({
                "rater_id": rater,
                "screen_id": sid,
                "model": screen["model"],
                "vowel": screen["vowel"],
                "role": st["role"],
                "pair": st.get("pair"),
                "stimulus_id": st["id"],
                "raw": raw,
                "score": norm,
            })
    return {"rows": rows, "excluded": excluded}


def read_score_sets(path) -> list:
    doc = read_json(path)
    if not isinstance(doc, list):
        raise ConfigError("scores file must be a JSON array of score sets")
    return doc


def write_normalized(normalized: dict, path) -> None:
    write_json(normalized, path)


class _StudyHandler(SimpleHTTPRequestHandler):
    """Static file serving plus one upload route for finished sessions."""

    results_dir: Path = Path("results")

    def log_message(self, fmt, *args):   # tests need a quiet server
        pass

    def do_POST(self):
        if self.path.rstrip("/") != "/submit":
            self.send_error(404, "only /submit accepts uploads")
            return
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        try:
            doc = json.loads(body.decode("utf-8"))
            if not isinstance(doc, list):
                raise ValueError("expected a JSON array of score sets")
            for entry in doc:
                if not isinstance(entry, dict) or "rater_id" not in entry \
                        or "screen_id" not in entry or "scores" not in entry:
                    raise ValueError("score sets need rater_id, screen_id, scores")
        except (ValueError, UnicodeDecodeError) as exc:
            self.send_error(400, f"bad upload: {exc}")
            return
        self.results_dir.mkdir(parents=True, exist_ok=True)
        stamp = int(time.time() * 1000)
        path = self.results_dir / f"scores_{stamp}.json"
        n = 0
        while path.exists():            # same-millisecond uploads
            n += 1
            path = self.results_dir / f"scores_{stamp}_{n}.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        payload = json.dumps({"saved": path.name}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


def make_server(root_dir, port: int = 0, results_dir=None) -> ThreadingHTTPServer:
    """Server for a prepared study directory; port 0 picks a free port."""
    root = Path(root_dir)
    if not (root / MANIFEST_FILENAME).is_file():
        raise ConfigError(f"no {MANIFEST_FILENAME} under {root}")
    results = Path(results_dir) if results_dir else root / "results"

    class Handler(_StudyHandler):
        pass

    Handler.results_dir = results
    # directory= keyword needs the cwd-independent handler from 3.7+
    def factory(*args, **kwargs):
        return Handler(*args, directory=str(root), **kwargs)

    return ThreadingHTTPServer(("127.0.0.1", port), factory)


def serve(root_dir, port: int = 8000, results_dir=None) -> None:
    server = make_server(root_dir, port=port, results_dir=results_dir)
    host, actual_port = server.server_address
    print(f"serving study at http://{host}:{actual_port}/ "
          f"(uploads to {Path(results_dir) if results_dir else Path(root_dir) / 'results'})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
