import csv
import io
import json
import subprocess
import sys

import pytest

from cwsolve.cli import EXIT_ERROR, EXIT_NO, EXIT_YES, bench_union, main
from cwsolve.clique_expr import evaluate, format_expression, parse_expression, width
from cwsolve.graph_core import format_graph, parse_graph

from conftest import FIXTURES, random_instance


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_yes_and_no(capsys):
    code, out, _ = run(capsys, "solve", "--problem", "cvc", "--expr", FIXTURES / "edge.cex", "--budget", 1)
    assert code == EXIT_YES and json.loads(out)["decision"] in (True, "yes")
    code, _, _ = run(capsys, "solve", "--problem", "cvc", "--expr", FIXTURES / "triangle.cex", "--budget", 1)
    assert code == EXIT_NO
    code, _, _ = run(capsys, "solve", "--problem", "cds", "--expr", FIXTURES / "triangle.cex", "--budget", 1)
    assert code == EXIT_YES


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--problem", "cvc", "--expr", str(FIXTURES / "edge.cex"), "--budget", "-1"])
    assert exc.value.code == EXIT_ERROR
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--problem", "tsp", "--expr", "x", "--budget", "1"])
    assert exc.value.code == EXIT_ERROR
    code, _, err = run(capsys, "solve", "--problem", "cvc", "--expr", FIXTURES / "edge.cex")
    assert code == EXIT_ERROR and "budget" in err


def test_input_errors(capsys, tmp_path):
    code, _, err = run(capsys, "solve", "--problem", "cvc", "--expr", tmp_path / "missing.cex", "--budget", 1)
    assert code == EXIT_ERROR and err.startswith("error:")
    bad = tmp_path / "bad.cex"
    bad.write_text("p cwexpr 1\n1: intro 1 0\n2: join 1 1 1\nroot 2\n")
    assert run(capsys, "solve", "--problem", "cvc", "--expr", bad, "--budget", 1)[0] == EXIT_ERROR
    costs = tmp_path / "costs"
    costs.write_text("1 x\n")
    assert run(capsys, "solve", "--problem", "cvc", "--expr", FIXTURES / "edge.cex",
               "--costs", costs, "--budget", 1)[0] == EXIT_ERROR


def test_graph_consistency_check(capsys, tmp_path):
    g = evaluate(parse_expression((FIXTURES / "triangle.cex").read_text()))
    path = tmp_path / "tri.graph"
    path.write_text(format_graph(g))
    args = ["solve", "--problem", "cvc", "--budget", 2, "--graph", path]
    assert run(capsys, *args, "--expr", FIXTURES / "triangle.cex")[0] == EXIT_YES
    code, _, err = run(capsys, *args, "--expr", FIXTURES / "c4.cex")
    assert code == EXIT_ERROR and "does not evaluate" in err


def test_solve_output_is_byte_identical(capsys, tmp_path):
    outs = []
    for jobs in (1, 1, 3):
        dest = tmp_path / f"out{len(outs)}.json"
        run(capsys, "solve", "--problem", "cds", "--expr", FIXTURES / "c4.cex", "--budget", 2,
            "--seed", 7, "--repeats", 5, "--jobs", jobs, "--out", dest)
        outs.append(dest.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_find_min_cost(capsys):
    code, out, _ = run(capsys, "solve", "--problem", "cvc", "--expr", FIXTURES / "c4.cex", "--find-min-cost")
    report = json.loads(out)
    assert code == EXIT_YES and report["min_cost"] == 3
    code, out, _ = run(capsys, "solve", "--problem", "cds", "--expr", FIXTURES / "p3.cex",
                       "--find-min-cost", "--jobs", 2)
    assert json.loads(out)["min_cost"] == 1


@pytest.mark.parametrize("stage", ["irredundant", "nice", "augmented"])
def test_transform_stages(capsys, tmp_path, stage):
    expr, g = random_instance(11, n_max=8, k_max=3)
    src = tmp_path / "in.cex"
    src.write_text(format_expression(expr))
    code, out, err = run(capsys, "transform", "--expr", src, "--stage", stage)
    assert code == EXIT_YES
    result = parse_expression(out)
    assert evaluate(result).adj == g.adj
    assert f"width before: {width(expr)} after: {width(result)}" in err
    assert width(result) == width(expr)
    again = tmp_path / "again.cex"
    again.write_text(out)
    assert run(capsys, "transform", "--expr", again, "--stage", stage)[1] == out


def test_verify_pass_and_fault(capsys):
    for problem, fixture in (("cvc", "p3.cex"), ("cds", "c4.cex")):
        code, out, _ = run(capsys, "verify", "--problem", problem, "--expr", FIXTURES / fixture)
        report = json.loads(out)
        assert code == EXIT_YES and report["ok"] and report["decisions"]["mismatches"] == []
    code, out, _ = run(capsys, "verify", "--problem", "cvc", "--expr", FIXTURES / "c4.cex", "--corrupt-feas")
    report = json.loads(out)
    assert code == EXIT_NO and not report["ok"]
    assert report["tables"][0]["mismatch"]["node_type"] == "Join"


def test_verify_guard(capsys, tmp_path):
    expr, _ = random_instance(3, n_max=12, n_min=10, k_max=3)
    src = tmp_path / "big.cex"
    src.write_text(format_expression(expr))
    code, _, err = run(capsys, "verify", "--problem", "cvc", "--expr", src)
    assert code == EXIT_ERROR and "limited" in err


def test_generate_outputs(capsys, tmp_path):
    dest = tmp_path / "gen"
    code, out, _ = run(capsys, "generate", "--problem", "cds", "--cnf", FIXTURES / "one.cnf",
                       "--beta", 1, "--out", dest)
    assert code == EXIT_YES
    manifest = json.loads((dest / "manifest.json").read_text())
    assert manifest == json.loads(out)
    assert manifest["gadget_checks_ok"] and manifest["width"] == manifest["width_bound"]
    graph = parse_graph((dest / "instance.graph").read_text())
    expr = parse_expression((dest / "instance.cex").read_text())
    assert evaluate(expr).adj == graph.adj and expr.is_linear()
    rows = (dest / "roles.tsv").read_text().splitlines()
    assert len(rows) == graph.n == manifest["vertices"]
    assert {r.split("\t")[1] for r in rows} >= {"root", "clause", "decoding", "clique", "subdivision"}


def test_bench_csv(capsys):
    code, out, _ = run(capsys, "bench", "--k-min", 1, "--k-max", 2, "--repeats", 1)
    assert code == EXIT_YES
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [(r["problem"], r["k"]) for r in rows] == [("cvc", "1"), ("cvc", "2"), ("cds", "1"), ("cds", "2")]
    assert rows[0]["ratio"] == "" and float(rows[1]["ratio"]) > 0
    assert int(rows[1]["cells"]) == 6 * int(rows[0]["cells"])
    assert int(rows[3]["cells"]) == 5 * int(rows[2]["cells"])
    assert run(capsys, "bench", "--k-min", 3, "--k-max", 2)[0] == EXIT_ERROR


def test_bench_union_cells():
    cells, secs = bench_union("cvc", 2, repeats=1)
    assert cells == 36 * 8 and secs >= 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cwsolve", "solve", "--problem", "cvc",
                           "--expr", str(FIXTURES / "edge.cex"), "--budget", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_NO
