#!/usr/bin/env python3
"""Reproduce the reference results on the original URIEL / TED-53 data.

The toolkit's CI gates only cover synthetic and oracle-checked inputs; the
reference numbers below additionally need data that cannot be redistributed
here. Supply a directory with:

    us.csv    URIEL syntax k-NN vectors (103 binary features, lang2vec)
    lt.csv    factored language embeddings learned on the 53-language TED corpus
    lw.csv    the published 23-language embeddings (optional)
    lb.csv    the published Bible-corpus embeddings, 512 dims (optional)
    meta.csv  lang,family,subfamily,size for the TED-53 languages
    gs.nwk    the 17-language Indo-European reference tree
              (data/gs_indoeuropean17.nwk ships an approximate transcription;
              for exact scores use the original published tree)

Language codes are ISO 639-3, with the three corrections used when matching
URIEL entries: zho->cmn, fas->pes, ara->arb.

Expected reference values and tolerances:

  tree inference      SVCCA(us, lt) thresholds (1.00, 0.55), ward + cosine:
                      edit distance 10 vs the 17-leaf reference (nAPTED 0.15).
                      Tolerance: +/- 2 edits; child order inside the inferred
                      dendrogram is canonicalized before scoring, and the
                      transcribed reference tree may differ in a few branches.
  correlations        spearman rho of the reference cophenetic matrix vs
                      cosine distances: us 0.48, lt 0.68, svcca 0.80
                      (p < 0.001). Tolerance: +/- 0.03.
  clustering          silhouette peak at k = 10 for the fused 53-language
                      space (average linkage).
  feature prediction  one-language-out macro accuracy: lt alone 77.96,
                      SVCCA(us, lt) 85.37 (SVCCA thresholds (0.75, 0.70)).
  ranking             children bos glg zlm est kat with budget 500000:
                      k = 5, 3, 4, 6, 10 candidates respectively.
  threshold sweep     most stable explained-variance threshold: 0.65 for us,
                      0.60 for lt and lw.

Known caveats: the published single-view lt tree row (15 edits / 0.26) is not
self-consistent with a 15-leaf binary dendrogram (15/62 = 0.24); treat that
row as indicative only. Single-view prediction here feeds the original
embeddings to the classifier; the reference setup additionally tuned an SVD
threshold per single view (0.7 for lt), which can shift that row slightly.
"""

import argparse
import json
import os
import re
import shutil
import subprocess
import sys
import tempfile


def run_cli(cli, *args):
    result = subprocess.run([cli, *args], capture_output=True, text=True)
    if result.returncode != 0:
        raise RuntimeError(f"{' '.join(args)} failed:\n{result.stderr}")
    return result.stdout


def newick_leaves(path):
    text = open(path).read()
    return sorted(set(re.findall(r"[(,]\s*([a-z]{3})\s*[:,)]", text)))


def read_view_rows(path):
    rows = {}
    header = None
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if cells[0] == "lang":
                header = line
                continue
            rows[cells[0]] = line
    return header, rows


def compose_view(dst, langs, primary, fallback):
    """One row per language, preferring `primary` (learned side) and falling
    back to `fallback` (KB side) for languages the learned view lacks."""
    header_p, rows_p = read_view_rows(primary)
    header_f, rows_f = read_view_rows(fallback)
    header = header_p or header_f
    with open(dst, "w") as f:
        if header:
            f.write(header + "\n")
        for code in langs:
            if code in rows_p:
                f.write(rows_p[code] + "\n")
            elif code in rows_f:
                f.write(rows_f[code] + "\n")
            else:
                raise RuntimeError(f"language {code} missing from both projected views")


class Report:
    def __init__(self):
        self.lines = []

    def add(self, name, computed, expected, tolerance_note):
        self.lines.append((name, computed, expected, tolerance_note))

    def dump(self):
        width = max(len(name) for name, *_ in self.lines) if self.lines else 0
        for name, computed, expected, note in self.lines:
            print(f"  {name:<{width}}  computed {computed:<12} expected {expected:<12} {note}")


def main():
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--data", required=True, help="directory with the input files listed above")
    parser.add_argument("--cli", default="mvlang", help="path to the mvlang binary")
    parser.add_argument("--out", default=None, help="keep intermediate artifacts here")
    args = parser.parse_args()

    data = args.data
    cli = args.cli
    if shutil.which(cli) is None and not os.path.exists(cli):
        print(f"mvlang binary not found at '{cli}'", file=sys.stderr)
        return 1

    def path(name):
        p = os.path.join(data, name)
        return p if os.path.exists(p) else None

    us, lt, lw = path("us.csv"), path("lt.csv"), path("lw.csv")
    meta, gs = path("meta.csv"), path("gs.nwk")
    if us is None or lt is None:
        print("need at least us.csv and lt.csv; see --help for the file list", file=sys.stderr)
        return 1

    work = args.out or tempfile.mkdtemp(prefix="mvlang-repro-")
    os.makedirs(work, exist_ok=True)
    report = Report()
    print(f"intermediate files in {work}\n")

    # --- tree inference at the published thresholds -------------------------
    # Project every language from its learned view where available; the rest
    # (e.g. English) enter the shared space through the KB side.
    model = os.path.join(work, "svcca_tree.json")
    fused_x = os.path.join(work, "fused_tree_x.csv")
    fused_y = os.path.join(work, "fused_tree_y.csv")
    run_cli(cli, "fuse", "--x", us, "--y", lt, "--tx", "1.0", "--ty", "0.55", "--out", model)
    run_cli(cli, "project", "--model", model, "--view", us, "--side", "x", "--out", fused_x)
    run_cli(cli, "project", "--model", model, "--view", lt, "--side", "y", "--out", fused_y)
    if gs:
        leaves = newick_leaves(gs)
        fused = os.path.join(work, "fused_tree_space.csv")
        compose_view(fused, leaves, fused_y, fused_x)
        tree = os.path.join(work, "svcca_tree.nwk")
        run_cli(cli, "tree", "--view", fused, "--linkage", "ward", "--out", tree)
        payload = json.loads(run_cli(cli, "treedist", "--a", gs, "--b", tree, "--json"))
        report.add("tree edit distance", f"{payload['ted']:.0f}", "10", "(+/- 2 edits)")
        report.add("normalized distance", f"{payload['napted']:.3f}", "0.15", "")

        # --- distance correlations ------------------------------------------
        # correlate restricts both sides to their common languages itself
        for name, view in (("us", us), ("lt", lt), ("svcca", fused)):
            expected = {"us": "0.48", "lt": "0.68", "svcca": "0.80"}[name]
            payload = json.loads(run_cli(cli, "correlate", "--a", gs, "--b", view, "--json"))
            report.add(f"spearman rho ({name})", f"{payload['rho']:.3f}", expected, "(+/- 0.03)")
    else:
        print("gs.nwk missing: skipping tree distance and correlation checks")

    # --- clustering of the fused 53-language space --------------------------
    clusters = os.path.join(work, "clusters.json")
    model53 = os.path.join(work, "svcca_53.json")
    fused53 = os.path.join(work, "fused_53.csv")
    run_cli(cli, "fuse", "--x", us, "--y", lt, "--tx", "0.65", "--ty", "0.6", "--out", model53)
    run_cli(cli, "project", "--model", model53, "--view", us, "--side", "x", "--out", fused53)
    run_cli(cli, "cluster", "--view", fused53, "--select", "silhouette", "--out", clusters)
    k = json.loads(open(clusters).read())["k"]
    report.add("silhouette peak k", str(k), "10", "")

    # --- typological feature prediction -------------------------------------
    pred_lt_path = os.path.join(work, "pred_lt.json")
    run_cli(cli, "predict", "--inputs", lt, "--targets", us,
            "--protocol", "one-language-out", "--out", pred_lt_path)
    pred_lt = json.loads(open(pred_lt_path).read())
    report.add("prediction acc (lt)", f"{100 * pred_lt['macro_accuracy']:.2f}", "77.96", "")

    model_pred = os.path.join(work, "svcca_pred.json")
    fused_pred = os.path.join(work, "fused_pred.csv")
    run_cli(cli, "fuse", "--x", us, "--y", lt, "--tx", "0.75", "--ty", "0.7", "--out", model_pred)
    run_cli(cli, "project", "--model", model_pred, "--view", lt, "--side", "y", "--out", fused_pred)
    pred_svcca_path = os.path.join(work, "pred_svcca.json")
    run_cli(cli, "predict", "--inputs", fused_pred, "--targets", us,
            "--protocol", "one-language-out", "--out", pred_svcca_path)
    pred_svcca = json.loads(open(pred_svcca_path).read())
    report.add("prediction acc (svcca)", f"{100 * pred_svcca['macro_accuracy']:.2f}", "85.37", "")

    # --- budget-constrained ranking ------------------------------------------
    if meta:
        expected_k = {"bos": 5, "glg": 3, "zlm": 4, "est": 6, "kat": 10}
        for child, expect in expected_k.items():
            out = os.path.join(work, f"rank_{child}.json")
            run_cli(cli, "rank", "--space", fused53, "--meta", meta, "--child", child,
                    "--budget", "500000", "--json", out)
            got = json.loads(open(out).read())["k"]
            report.add(f"ranking k ({child})", str(got), str(expect), "")
    else:
        print("meta.csv missing: skipping ranking checks")

    # --- bootstrap stability of the explained-variance threshold -------------
    sweeps = [("us", us, "0.65")] + ([("lt", lt, "0.60")] if lt else []) + \
             ([("lw", lw, "0.60")] if lw else [])
    for name, view, expect in sweeps:
        out = os.path.join(work, f"sweep_{name}.json")
        run_cli(cli, "sweep", "--view", view, "--replicates", "100", "--seed", "1", "--out", out)
        got = json.loads(open(out).read())["recommended_threshold"]
        report.add(f"stable threshold ({name})", f"{got:.2f}", expect, "")

    print("reference comparison:")
    report.dump()
    print("\nnotes: rho tolerance +/- 0.03; edit-distance tolerance +/- 2; the remaining")
    print("rows depend on the exact embedding files and reference tree transcription.")
    return 0


if __name__ == "__main__":
    sys.exit(main())
