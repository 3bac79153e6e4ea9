#!/usr/bin/env python3
"""Writes the study fixtures under tests/fixtures.

stimuli/{de,en,sv,fi}.txt  40 words each: length-6 candidates sampled from the
                           Swedish model, lexicon-filtered, and split into the
                           disjoint tops of the German/English/Swedish rankings;
                           fillers are Swedish lexicon words.
control_trials.csv         three Swedish control raters whose per-group mean
                           reaction times are the control-group table values.
german_trials.csv          eight German raters whose per-group rejection and
                           acceptance means are the published per-rater values.

Usage: scripts/make_fixtures.py [path/to/nonword]
"""
import random
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
BIN = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "build/tools/nonword"
OUT = ROOT / "tests/fixtures"
MODELS = ROOT / "data/models"
N = 40
GROUPS = ["DE", "EN", "SV", "FI"]

# rater -> (proficiency, combined mean per group DE EN SV FI)
CONTROL = {
    "C1": ("A", [4.75, 3.50, 4.85, 1.45]),
    "C2": ("A", [1.60, 1.60, 1.80, 1.30]),
    "C3": ("A", [2.50, 2.15, 3.05, 2.40]),
}

# rater -> (proficiency, [x0, x1, xC] per group DE EN SV FI); 0 = no such trials
GERMAN = {
    "R1": ("B", [2.14, 3.09, 2.40, 2.7, 3.3, 2.85, 2.58, 2.33, 2.45, 2.83, 3.14, 3.00]),
    "R2": ("I", [2.57, 4.67, 3.20, 2.78, 7.00, 3.20, 3.18, 5.00, 3.45, 3.00, 3.35, 3.30]),
    "R3": ("I", [2.29, 5.33, 2.75, 2.00, 0, 2.00, 4.69, 4.00, 4.45, 3.67, 2.00, 2.25]),
    "R4": ("A", [4.35, 0, 4.35, 4.21, 0, 4.21, 4.95, 0, 4.95, 4.83, 2.64, 3.30]),
    "R5": ("A", [7.31, 7.5, 7.35, 5.60, 0, 5.60, 5.60, 0, 5.60, 12.00, 3.26, 3.70]),
    "R6": ("A", [2.47, 3.00, 2.50, 2.65, 0, 2.65, 3.53, 7.00, 3.70, 2.50, 1.65, 1.75]),
    "R7": ("A", [1.83, 4.50, 2.10, 2.10, 0, 2.10, 4.12, 3.33, 4.00, 3.33, 1.82, 2.05]),
    "R8": ("A", [10.20, 0, 10.20, 3.89, 7.00, 4.05, 8.00, 0, 8.00, 14.40, 5.33, 7.60]),
}


def run(args, stdin=None):
    return subprocess.run([str(BIN), *args], input=stdin, capture_output=True, text=True, check=True).stdout


def stimuli():
    pool = run(["generate", "--model", str(MODELS / "sv.posgram"), "--length", "6", "--count", "4000",
                "--seed", "20240601"])
    pool = run(["filter", "--lexicon", str(ROOT / "data/lexicon/sv_words.txt"),
                "--exclusions", str(ROOT / "data/lexicon/sv_exclusions.txt")], pool)
    ranked = {}
    for lang in ("de", "en", "sv"):
        tsv = run(["rank", "--model", str(MODELS / f"{lang}.posgram")], pool)
        ranked[lang] = [line.split("\t")[1] for line in tsv.splitlines()]
    taken, lists = set(), {}
    for lang in ("de", "en", "sv"):  # round-robin so no list gets first pick of everything
        lists[lang] = []
    while any(len(v) < N for v in lists.values()):
        for lang in ("de", "en", "sv"):
            for w in ranked[lang]:
                if w not in taken:
                    taken.add(w)
                    lists[lang].append(w)
                    break
    words = [w.strip() for w in (ROOT / "data/lexicon/sv_words.txt").read_text(encoding="utf-8").splitlines()]
    six = sorted(w for w in words if len(w) == 6)
    lists["fi"] = random.Random(7).sample(six, N)
    (OUT / "stimuli").mkdir(parents=True, exist_ok=True)
    for lang, ws in lists.items():
        (OUT / "stimuli" / f"{lang}.txt").write_text("".join(w + "\n" for w in ws), encoding="utf-8")
    return {g: lists[g.lower()] for g in GROUPS}


def spread(mean, n, rng):
    """n positive values with exactly the given mean (to 3 decimals)."""
    if n == 0:
        return []
    half = min(0.6 * mean, 1.5)
    offs = [round(rng.uniform(-half, half), 3) for _ in range(n // 2)]
    vals = [mean + o for o in offs] + [mean - o for o in offs]
    if n % 2:
        vals.append(mean)
    rng.shuffle(vals)
    return [f"{v:.3f}" for v in vals]


def write_log(path, raters, l1, cells, words):
    rng = random.Random(path.name)
    rows = []
    for rater, (prof, values) in raters.items():
        trials = []
        for gi, g in enumerate(GROUPS):
            for response, rts in zip(("REJECT", "ACCEPT"), cells(values, gi, rng)):
                for rt in rts:
                    trials.append((g, response, rt))
        rng.shuffle(trials)
        used = {g: 0 for g in GROUPS}
        for g, response, rt in trials:
            word = words[g][used[g]]
            used[g] += 1
            rows.append(f"{rater},{l1},{prof},{word},{g},{response},{rt}")
    path.write_text("rater_id,l1,proficiency,word,group,response,rt_seconds\n" + "".join(r + "\n" for r in rows),
                    encoding="utf-8")


def control_cells(values, gi, rng):
    # every answer correct
    rts = spread(values[gi], N, rng)
    return (rts, []) if GROUPS[gi] != "FI" else ([], rts)


def german_cells(values, gi, rng):
    x0, x1, xc = values[3 * gi:3 * gi + 3]
    n1 = 0 if x1 == 0 else round(N * (xc - x0) / (x1 - x0))
    return spread(x0, N - n1, rng), spread(x1, n1, rng)


def main():
    words = stimuli()
    write_log(OUT / "control_trials.csv", CONTROL, "sv", control_cells, words)
    write_log(OUT / "german_trials.csv", GERMAN, "de", german_cells, words)


if __name__ == "__main__":
    main()
