import json
import subprocess
import sys

import pytest

from stochmatch.cli import main
from stochmatch.corpus import corpus_dir
from stochmatch.instance import load

CORPUS = corpus_dir()


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_constants(capsys):
    code, out, _ = run(capsys, "constants")
    assert code == 0
    assert "main_worst_case_ratio,0.39338739" in out
    assert "online_ratio_function(0.74),0.245712219628" in out
    assert out.splitlines()[0] == "p,g,h"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "stochmatch", "constants", "--steps", "2"],
                         capture_output=True, text=True, check=True)
    assert "0.393387390278" in res.stdout


def test_run_is_deterministic(capsys):
    args = ("run", str(CORPUS / "star-4.json"), "--algo", "main", "--seed", "1", "--trials", "1000")
    code, first, _ = run(capsys, *args)
    assert code == 0
    _, second, _ = run(capsys, *args, "--workers", "3")
    assert first == second
    assert first.splitlines()[0] == "instance,algorithm,trials,seed,mean,stderr,ci_low,ci_high,lp_value"


def test_run_json_and_per_trial(capsys):
    code, out, _ = run(capsys, "run", str(CORPUS / "single-edge.json"), "--algo", "alg1", "--trials", "5",
                       "--format", "json")
    assert code == 0 and json.loads(out)[0]["trials"] == 5
    code, out, _ = run(capsys, "run", str(CORPUS / "star-2.json"), "--algo", "alg1", "--trials", "3",
                       "--per-trial")
    lines = out.strip().splitlines()
    assert lines[0] == "trial,edge,probed,matched,profit"
    assert len(lines) == 1 + 3 * 2


def test_online_run(capsys):
    code, out, _ = run(capsys, "run", str(CORPUS / "online-3x3-s0.json"), "--algo", "online-combined",
                       "--trials", "200", "--delta", "0.74")
    assert code == 0 and "online-combined" in out


def test_gen_round_trip(tmp_path, capsys):
    out = tmp_path / "g.json"
    code, _, _ = run(capsys, "gen", "--kind", "offline-general", "--vertices", "5", "--density", "0.5",
                     "--prob", "two-point:0.05:1:0.5", "--seed", "4", "--out", str(out))
    assert code == 0
    inst = load(out)
    assert inst.n_edges == 5 and set(inst.p.tolist()) <= {0.05, 1.0}
    code, _, err = run(capsys, "gen", "--density", "2")
    assert code == 2 and "density" in err


def test_lp_and_listing(capsys):
    code, out, _ = run(capsys, "lp", str(CORPUS / "triangle.json"))
    assert code == 0 and "# objective,1\n" in out
    code, out, _ = run(capsys, "lp", str(CORPUS / "triangle.json"), "--listing")
    assert "blossom{u,v,w}" in out
    code, out, _ = run(capsys, "lp", str(CORPUS / "triangle.json"), "--which", "bip")
    assert "# objective,1.5" in out


def test_round(capsys):
    code, out, _ = run(capsys, "round", str(CORPUS / "cycle-4.json"), "--trials", "2000")
    assert code == 0 and out.splitlines()[0] == "edge,x,frequency"
    code, out, _ = run(capsys, "round", str(CORPUS / "online-3x3-s0.json"), "--trials", "200")
    assert code == 0
    code, _, err = run(capsys, "round", str(CORPUS / "triangle.json"))
    assert code == 2


def test_oracle(capsys):
    code, out, _ = run(capsys, "oracle", str(CORPUS / "star-2.json"), "--format", "json")
    row = json.loads(out)[0]
    assert code == 0 and row["opt_value"] == 0.75 and row["lp_value"] == 1.0


def test_bench_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"cells": [{"instance": str(CORPUS / "single-edge.json"), "algorithm": "main",
                                           "trials": 2000, "threshold": 0.39}]}))
    code, out, _ = run(capsys, "bench", str(good))
    assert code == 0 and "true" in out
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"cells": [{"instance": str(CORPUS / "single-edge.json"), "algorithm": "main",
                                          "trials": 2000, "threshold": 1.01}]}))
    code, out, _ = run(capsys, "bench", str(bad))
    assert code == 1 and "false" in out
    empty = tmp_path / "empty.json"
    empty.write_text('{"cells": []}')
    assert run(capsys, "bench", str(empty))[0] == 0


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "run", "missing.json", "--algo", "main")[0] == 2
    assert run(capsys, "run", str(CORPUS / "triangle.json"), "--algo", "main")[0] == 2
    assert run(capsys, "run", str(CORPUS / "star-2.json"), "--algo", "main", "--trials", "1")[0] == 2
    assert run(capsys, "bench", "missing-suite.json")[0] == 2
    assert run(capsys)[0] == 2


def test_bad_instance_file(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text('{"kind": "offline-general", "vertices": [{"id": "a"}], "edges": []}')
    code, _, err = run(capsys, "oracle", str(p))
    assert code == 2 and "vertices[0].timeout" in err


def test_help_exits_zero(capsys):
    assert run(capsys, "--help")[0] == 0
