"""End-to-end tests for the mvlang command line tool."""

import json
import os
import subprocess

import numpy as np
import pytest

CLI = os.environ.get("MVLANG_CLI", "mvlang")


def run(*args, cwd=None):
    return subprocess.run([CLI, *args], capture_output=True, text=True, cwd=cwd)


def write_view(path, codes, data, header=True):
    with open(path, "w") as f:
        if header:
            f.write("lang," + ",".join(f"f{j}" for j in range(data.shape[1])) + "\n")
        for code, row in zip(codes, data):
            f.write(code + "," + ",".join("%.17g" % v for v in row) + "\n")


@pytest.fixture
def workdir(tmp_path):
    rng = np.random.default_rng(42)
    codes = [
        "bel", "bos", "bul", "ces", "dan", "deu", "ell", "eng", "est", "fin",
        "fra", "glg", "hrv", "ita", "kat", "lit", "mkd", "nld", "pol", "por",
        "ron", "rus", "slk", "slv", "spa", "swe", "ukr", "zlm",
    ]
    n = len(codes)
    z = rng.normal(size=(n, 4))
    x = z @ rng.normal(size=(4, 12)) + 0.05 * rng.normal(size=(n, 12))
    y = z @ rng.normal(size=(4, 9)) + 0.05 * rng.normal(size=(n, 9))
    write_view(tmp_path / "us.csv", codes, x)
    write_view(tmp_path / "lt.csv", codes, y, header=False)
    with open(tmp_path / "meta.csv", "w") as f:
        f.write("lang,family,subfamily,size\n")
        for i, code in enumerate(codes):
            f.write(f"{code},fam{i % 4},,{(i + 1) * 7000}\n")
    return tmp_path


def test_help_and_usage_errors():
    assert run("--help").returncode == 0
    assert run("fuse", "--help").returncode == 0
    assert run("no-such-command").returncode == 1
    assert run("fuse", "--bogus-flag").returncode == 1
    assert run().returncode == 1  # subcommand required


def test_fuse_project_cluster_rank(workdir):
    fuse = run(
        "fuse", "--x", "us.csv", "--y", "lt.csv", "--tx", "1.0", "--ty", "0.9",
        "--out", "model.json", "--report", "report.json", cwd=workdir,
    )
    assert fuse.returncode == 0, fuse.stderr
    assert "shared_dim" in fuse.stdout
    report = json.loads((workdir / "report.json").read_text())
    assert report["shared_dim"] >= 1
    assert report["view_x"]["input_dim"] == 12

    project = run(
        "project", "--model", "model.json", "--view", "us.csv", "--side", "x",
        "--out", "fused.csv", cwd=workdir,
    )
    assert project.returncode == 0, project.stderr

    tree = run(
        "tree", "--view", "fused.csv", "--linkage", "ward", "--out", "tree.nwk",
        "--merges", "merges.csv", "--plot", "dendro.svg", cwd=workdir,
    )
    assert tree.returncode == 0, tree.stderr
    assert (workdir / "tree.nwk").read_text().strip().endswith(";")
    assert (workdir / "merges.csv").read_text().startswith("step,left,right,height,size")
    assert "<svg" in (workdir / "dendro.svg").read_text()

    cluster = run(
        "cluster", "--view", "fused.csv", "--select", "silhouette",
        "--out", "clusters.json", "--curve", "curve.csv", "--elbow", "elbow.csv",
        cwd=workdir,
    )
    assert cluster.returncode == 0, cluster.stderr
    clusters = json.loads((workdir / "clusters.json").read_text())
    assert clusters["k"] >= 2
    assert len(clusters["assignments"]) == 28

    rank = run(
        "rank", "--space", "fused.csv", "--meta", "meta.csv", "--child", "kat",
        "--budget", "500000", "--min-size", "10000", "--json", "rank.json",
        "--explain", "explain.csv", cwd=workdir,
    )
    assert rank.returncode == 0, rank.stderr
    ranking = json.loads((workdir / "rank.json").read_text())
    assert ranking["child"] == "kat"
    assert sum(c["train_size"] for c in ranking["candidates"]) == ranking["accumulated_size"]
    assert all(c["train_size"] >= 10000 for c in ranking["candidates"])
    explain_lines = (workdir / "explain.csv").read_text().strip().splitlines()
    assert explain_lines[0] == "code,similarity,train_size,cumulative_size,eligible"
    assert len(explain_lines) == 28  # header + 27 non-child languages


def test_treedist_and_correlate(workdir):
    (workdir / "a.nwk").write_text("((bel,bos),(bul,ces));\n")
    (workdir / "b.nwk").write_text("((bos,bel),(ces,bul));\n")
    same = run("treedist", "--a", "a.nwk", "--b", "a.nwk", cwd=workdir)
    assert same.returncode == 0
    assert "ted 0" in same.stdout
    assert "napted 0" in same.stdout

    canonical = run("treedist", "--a", "a.nwk", "--b", "b.nwk", "--json", cwd=workdir)
    assert canonical.returncode == 0
    payload = json.loads(canonical.stdout)
    assert payload["ted"] == 0.0
    assert payload["nodes_a"] == 7

    fuse = run(
        "fuse", "--x", "us.csv", "--y", "lt.csv", "--tx", "1.0", "--ty", "1.0",
        "--out", "model.json", cwd=workdir,
    )
    assert fuse.returncode == 0
    assert run(
        "project", "--model", "model.json", "--view", "us.csv", "--side", "x",
        "--out", "fused.csv", cwd=workdir,
    ).returncode == 0
    assert run(
        "tree", "--view", "fused.csv", "--out", "full.nwk", cwd=workdir
    ).returncode == 0
    correlate = run("correlate", "--a", "full.nwk", "--b", "fused.csv", "--json", cwd=workdir)
    assert correlate.returncode == 0, correlate.stderr
    payload = json.loads(correlate.stdout)
    assert -1.0 <= payload["rho"] <= 1.0
    assert payload["n_pairs"] == 28 * 27 // 2


def test_project_passes_unknown_codes_through(workdir):
    fuse = run(
        "fuse", "--x", "us.csv", "--y", "lt.csv", "--tx", "1.0", "--ty", "1.0",
        "--out", "model.json", cwd=workdir,
    )
    assert fuse.returncode == 0, fuse.stderr
    # a language the model never saw projects fine from the x side
    rng = np.random.default_rng(2)
    write_view(workdir / "new.csv", ["qqq", "zzz"], rng.normal(size=(2, 12)))
    project = run(
        "project", "--model", "model.json", "--view", "new.csv", "--side", "x",
        "--out", "new_fused.csv", cwd=workdir,
    )
    assert project.returncode == 0, project.stderr
    lines = (workdir / "new_fused.csv").read_text().strip().splitlines()
    assert lines[1].startswith("qqq,")
    assert lines[2].startswith("zzz,")


def test_sweep_with_partner(workdir):
    sweep = run(
        "sweep", "--view", "us.csv", "--partner", "lt.csv", "--thresholds", "0.9",
        "--sizes", "10,20", "--replicates", "10", "--seed", "4", "--out", "psweep.json",
        cwd=workdir,
    )
    assert sweep.returncode == 0, sweep.stderr
    payload = json.loads((workdir / "psweep.json").read_text())
    assert payload["recommended_threshold"] == 0.9
    assert len(payload["reports"][0]["sizes"]) == 2


def test_sweep_outputs(workdir):
    sweep = run(
        "sweep", "--view", "us.csv", "--thresholds", "0.6,0.9", "--sizes", "10,20,28",
        "--replicates", "10", "--seed", "3", "--out", "sweep.json", "--csv", "sweep.csv",
        cwd=workdir,
    )
    assert sweep.returncode == 0, sweep.stderr
    assert "recommended threshold" in sweep.stdout
    payload = json.loads((workdir / "sweep.json").read_text())
    assert len(payload["reports"]) == 2
    assert payload["recommended_threshold"] in (0.6, 0.9)
    lines = (workdir / "sweep.csv").read_text().strip().splitlines()
    assert lines[0] == "threshold,size,mean_k,ci_low,ci_high,sd"
    assert len(lines) == 7  # header + 2 thresholds x 3 sizes


def test_cluster_finds_planted_blobs(tmp_path):
    rng = np.random.default_rng(12)
    codes = [f"a{chr(97 + i)}{chr(97 + j)}" for i in range(4) for j in range(8)]
    centers = rng.normal(scale=6.0, size=(4, 5))
    data = np.vstack([centers[b] + 0.05 * rng.normal(size=(8, 5)) for b in range(4)])
    write_view(tmp_path / "blobs.csv", codes, data)
    result = run("cluster", "--view", "blobs.csv", "--select", "silhouette",
                 "--out", "blobs.json", cwd=tmp_path)
    assert result.returncode == 0, result.stderr
    assert json.loads((tmp_path / "blobs.json").read_text())["k"] == 4


def test_predict_subcommand(workdir):
    rng = np.random.default_rng(9)
    codes = sorted({f"a{chr(97 + i)}{chr(97 + j)}" for i in range(5) for j in range(5)})[:20]
    x = rng.normal(size=(20, 4))
    targets = np.zeros((20, 3))
    for f in range(3):
        targets[:, f] = (x[:, f] >= 0).astype(float)
        x[:, f] += np.where(targets[:, f] > 0, 0.35, -0.35)
    write_view(workdir / "inputs.csv", codes, x)
    write_view(workdir / "targets.csv", codes, targets)
    with open(workdir / "fam.csv", "w") as f:
        f.write("lang,family,subfamily,size\n")
        for i, code in enumerate(codes):
            f.write(f"{code},fam{i % 2},,0\n")

    predict = run(
        "predict", "--inputs", "inputs.csv", "--targets", "targets.csv",
        "--protocol", "one-language-out", "--out", "pred.json", "--csv", "pred.csv",
        cwd=workdir,
    )
    assert predict.returncode == 0, predict.stderr
    payload = json.loads((workdir / "pred.json").read_text())
    assert payload["fold_count"] == 20
    assert payload["macro_accuracy"] > 0.9

    family = run(
        "predict", "--inputs", "inputs.csv", "--targets", "targets.csv",
        "--meta", "fam.csv", "--protocol", "one-family-out", cwd=workdir,
    )
    assert family.returncode == 0, family.stderr
    assert "2 folds" in family.stdout


def test_error_exit_codes(workdir):
    # input errors -> 2
    (workdir / "empty.csv").write_text("")
    empty = run(
        "fuse", "--x", "empty.csv", "--y", "lt.csv", "--tx", "1.0", "--ty", "1.0",
        "--out", "m.json", cwd=workdir,
    )
    assert empty.returncode == 2
    assert "MalformedInput" in empty.stderr

    # uncorrelated views -> NoCorrelatedDimensions -> 2
    rng = np.random.default_rng(1)
    codes = [
        "a" + chr(97 + i) + chr(97 + j) for i in range(26) for j in range(26)
    ][:300]
    write_view(workdir / "nx.csv", codes, rng.normal(size=(300, 3)))
    write_view(workdir / "ny.csv", codes, rng.normal(size=(300, 3)))
    nocorr = run(
        "fuse", "--x", "nx.csv", "--y", "ny.csv", "--tx", "1.0", "--ty", "1.0",
        "--out", "m.json", cwd=workdir,
    )
    assert nocorr.returncode == 2
    assert "NoCorrelatedDimensions" in nocorr.stderr

    # constant view -> numerical failure -> 3
    write_view(workdir / "const.csv", ["aaa", "aab", "aac"], np.ones((3, 4)))
    degenerate = run(
        "fuse", "--x", "const.csv", "--y", "const.csv", "--tx", "1.0", "--ty", "1.0",
        "--out", "m.json", cwd=workdir,
    )
    assert degenerate.returncode == 3
    assert "DegenerateView" in degenerate.stderr

    # off-grid threshold -> usage error -> 1
    offgrid = run(
        "fuse", "--x", "us.csv", "--y", "lt.csv", "--tx", "0.83", "--ty", "1.0",
        "--out", "m.json", cwd=workdir,
    )
    assert offgrid.returncode == 1

    # malformed newick -> 2
    (workdir / "bad.nwk").write_text("((a,b),c")
    bad = run("treedist", "--a", "bad.nwk", "--b", "bad.nwk", cwd=workdir)
    assert bad.returncode == 2
    assert "NewickParseError" in bad.stderr


def test_outputs_are_reproducible(workdir):
    args = [
        "fuse", "--x", "us.csv", "--y", "lt.csv", "--tx", "0.95", "--ty", "0.9",
        "--out", "m1.json",
    ]
    assert run(*args, cwd=workdir).returncode == 0
    first = (workdir / "m1.json").read_bytes()
    assert run(*args, cwd=workdir).returncode == 0
    assert (workdir / "m1.json").read_bytes() == first

    config = workdir / "mvlang.ini"
    config.write_text("[fuse]\nx=us.csv\ny=lt.csv\ntx=0.95\nty=0.9\nout=m2.json\n")
    viaconfig = run("--config", "mvlang.ini", "fuse", cwd=workdir)
    assert viaconfig.returncode == 0, viaconfig.stderr
    assert (workdir / "m2.json").read_bytes() == first
