import csv
import io
import json
import math
import os
import shutil
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from conftest import helix_coords, make_embedding

from helicality.cli import main
from helicality.helix import fit_helix
from helicality.pipeline import HelicalityReport
from helicality.report import dumps_report, dumps_scores, loads_report
from helicality.svg import side_view_svg, top_view_svg
from helicality.synth import harmonic_corpus, noise_corpus

SVG_NS = "{http://www.w3.org/2000/svg}"


def record(name, h, mse=None, n=10):
    return {
        "group": name,
        "n_files": n,
        "helicality": h,
        "mse": mse if mse is not None else (0.0 if math.isinf(h) else 1.0 / h),
        "circle": {"radius": 1.0, "center": [0.0, 0.0]},
        "line": {"a": 0.5, "b": -1.0},
    }


def test_empty_report_json():
    text = dumps_report(HelicalityReport(config={}, groups=[]))
    data = json.loads(text)
    assert data["groups"] == [] and data["warnings"] == []
    assert list(data) == sorted(data)


def test_report_round_trip_and_inf():
    rep = HelicalityReport(config={"q": 24}, groups=[record("a", math.inf), record("b", 0.1 + 0.2)])
    text = dumps_report(rep)
    assert '"helicality": "inf"' in text
    assert "0.30000000000000004" in text
    back = loads_report(text)
    assert back == rep
    assert dumps_report(back) == text


def test_scores_csv_order_and_ties():
    rep = HelicalityReport(
        config={},
        groups=[record("low", 0.5), record("zeta", 2.0), record("alpha", 2.0), record("top", math.inf),
                {"group": "broken", "error": "x", "error_type": "DataError"}],
    )
    rows = list(csv.reader(io.StringIO(dumps_scores(rep))))
    assert rows[0] == ["group", "n_files", "helicality", "mse", "radius", "a", "b"]
    assert [r[0] for r in rows[1:]] == ["top", "alpha", "zeta", "low"]
    assert rows[1][2] == "inf"


def test_single_group_scores_csv():
    text = dumps_scores(HelicalityReport(config={}, groups=[record("all", 1.5)]))
    assert len(text.splitlines()) == 2


def test_top_view_svg_geometry():
    fit = fit_helix(make_embedding(helix_coords(radius=2.0, center=(1.0, 1.0))))
    emb = make_embedding(helix_coords(radius=2.0, center=(1.0, 1.0)))
    root = ET.fromstring(top_view_svg(emb, fit.centroids, fit.hull, fit.circle, "g & <1>"))
    fit_circle = root.find(f"{SVG_NS}circle[@class='fit']")
    cx, cy, r = (float(fit_circle.get(k)) for k in ("cx", "cy", "r"))
    dots = root.findall(f"{SVG_NS}circle[@class='bin']")
    assert len(dots) == 72
    for d in dots:
        assert abs(math.hypot(float(d.get("cx")) - cx, float(d.get("cy")) - cy) - r) <= 1.0
    assert len(root.findall(f"{SVG_NS}rect[@class='hull-vertex']")) == 24
    assert root.find(f"{SVG_NS}polygon[@class='initial-center']") is not None
    assert root.find(f"{SVG_NS}rect[@class='final-center']") is not None
    assert root.find(f"{SVG_NS}title").text == "g & <1>"
    side = ET.fromstring(side_view_svg(emb, fit.projected))
    assert len(side.findall(f"{SVG_NS}circle[@class='bin']")) == 72


# end-to-end CLI on a small two-group corpus

@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    harmonic_corpus(root / "h", seed=7, amplitudes=(0.3, 0.7))
    noise_corpus(root / "n", seed=7, n_files=40)
    rows = []
    for sub in ("h", "n"):
        with open(root / sub / "manifest.csv") as fh:
            for r in list(csv.reader(fh))[1:]:
                rows.append((f"{sub}/{r[0]}", r[1]))
    with open(root / "manifest.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["path", "group"])
        w.writerows(rows)
    return root


@pytest.fixture(scope="module")
def cli_run(corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("out")
    code = main(["run", "--manifest", str(corpus / "manifest.csv"), "--out", str(out), "--group-by", "group",
                 "--dump-intermediates", "--svg", "--jobs", "4"])
    assert code == 0
    return out


def test_cli_outputs(cli_run):
    names = sorted(os.listdir(cli_run))
    assert names == ["intermediates", "report.json", "scores.csv", "svg"]
    assert sorted(os.listdir(cli_run / "svg")) == ["harmonic_side.svg", "harmonic_top.svg", "noise_side.svg", "noise_top.svg"]
    for f in os.listdir(cli_run / "svg"):
        ET.parse(cli_run / "svg" / f)
    inter = sorted(os.listdir(cli_run / "intermediates"))
    assert len(inter) == 10 and "harmonic_embedding.csv" in inter
    data = json.loads((cli_run / "report.json").read_text())
    assert [g["group"] for g in data["groups"]] == ["harmonic", "noise"]
    assert data["config"]["q"] == 24 and "output_dir" not in data["config"]
    rows = list(csv.reader(open(cli_run / "scores.csv")))
    assert len(rows) == 3


def test_features_input_matches_audio(cli_run, tmp_path):
    feats = cli_run / "intermediates" / "harmonic_features.csv"
    out = tmp_path / "f"
    assert main(["run", "--features", str(feats), "--out", str(out), "--group-name", "harmonic"]) == 0
    a = json.loads((cli_run / "report.json").read_text())["groups"][0]
    b = json.loads((out / "report.json").read_text())["groups"][0]
    assert a == b


def test_group_permutation(corpus, cli_run, tmp_path):
    with open(corpus / "manifest.csv") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    swapped = [r for r in body if r[1] == "noise"] + [r for r in body if r[1] == "harmonic"]
    path = corpus / "manifest_swapped.csv"
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows([head, *swapped])
    out = tmp_path / "p"
    assert main(["run", "--manifest", str(path), "--out", str(out), "--group-by", "group", "--jobs", "4"]) == 0
    a = {g["group"]: g for g in json.loads((cli_run / "report.json").read_text())["groups"]}
    b = json.loads((out / "report.json").read_text())["groups"]
    assert [g["group"] for g in b] == ["noise", "harmonic"]
    assert {g["group"]: g for g in b} == a


def test_exit_code_config_errors(tmp_path, capsys):
    assert main(["run", "--manifest", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 2
    feats = tmp_path / "f.csv"
    feats.write_text("freq_hz,a,b\n1.0,1,2\n")
    assert main(["run", "--features", str(feats), "--out", str(tmp_path), "--knn", "0"]) == 2
    assert main(["run", "--features", str(feats), "--out", str(tmp_path), "--sr", "4000"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["run", "--out", str(tmp_path)])
    assert exc.value.code == 2


def _write_features(path, data, q=24):
    freqs = 32.703 * 2.0 ** (np.arange(data.shape[0]) / q)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["freq_hz", *(f"f{i}" for i in range(data.shape[1]))])
        for f, row in zip(freqs, data):
            w.writerow([repr(float(f)), *(repr(float(v)) for v in row)])


def test_exit_code_data_error(tmp_path, capsys):
    feats = tmp_path / "f.csv"
    _write_features(feats, np.random.default_rng(0).uniform(size=(70, 20)))
    assert main(["run", "--features", str(feats), "--out", str(tmp_path / "o")]) == 3
    assert "not a multiple" in capsys.readouterr().err


def test_exit_code_numerical_error(tmp_path):
    rng = np.random.default_rng(0)
    base = rng.uniform(size=(36, 40))
    data = np.repeat(base, 2, axis=0) + rng.uniform(size=(72, 40)) * 1e-6
    feats = tmp_path / "f.csv"
    _write_features(feats, data)
    assert main(["run", "--features", str(feats), "--out", str(tmp_path / "o"), "--knn", "1"]) == 4
    code = main(["run", "--features", str(feats), "--out", str(tmp_path / "k"), "--knn", "1",
                 "--disconnect-policy", "largest-component"])
    assert code == 4


def test_keep_going_records_failures(corpus, tmp_path):
    root = tmp_path / "c"
    shutil.copytree(corpus / "h", root)
    with open(root / "manifest.csv", "a") as fh:
        fh.write("saw_000_0.30.wav,tiny\n")
    out = tmp_path / "o"
    assert main(["run", "--manifest", str(root / "manifest.csv"), "--out", str(out),
                 "--group-by", "group", "--keep-going"]) == 0
    groups = json.loads((out / "report.json").read_text())["groups"]
    assert groups[1]["group"] == "tiny" and groups[1]["error_type"] == "DataError"
    assert main(["run", "--manifest", str(root / "manifest.csv"), "--out", str(tmp_path / "o2"),
                 "--group-by", "group"]) == 3
