import csv
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from finchar.cli import EXIT_ALGO, EXIT_CAP, EXIT_OK, EXIT_PARSE, EXIT_VERIFY, main

CUBE = "q 3\nn 3\nx1*x2*x3^2 + 2\n"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_solve_cube_json(tmp_path, capsys):
    path = write(tmp_path, "cube.sys", CUBE)
    code, out, _ = run(capsys, "solve", path, "--json", "--enumerate")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["status"] == "complete" and rep["total_count"] == "4"
    assert len(rep["components"]) == 1
    assert sorted(map(tuple, rep["zeros"])) == [(1, 1, 1), (1, 1, 2), (2, 2, 1), (2, 2, 2)]
    assert rep["field"]["p"] == 3 and rep["field"]["k"] == 1


def test_solve_summary_text(tmp_path, capsys):
    path = write(tmp_path, "cube.sys", CUBE)
    code, out, _ = run(capsys, "solve", path)
    assert code == EXIT_OK and "4" in out


def test_solve_empty_system(tmp_path, capsys):
    path = write(tmp_path, "e.sys", "q 2\nn 3\n")
    code, out, _ = run(capsys, "solve", path, "--json")
    assert json.loads(out)["total_count"] == "8"


def test_solve_inconsistent(tmp_path, capsys):
    path = write(tmp_path, "i.sys", "q 3\nn 1\nx1^2 + 1\n")
    code, out, _ = run(capsys, "solve", path, "--json")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["status"] == "inconsistent" and rep["components"] == []


def test_parse_error_exit_code(tmp_path, capsys):
    path = write(tmp_path, "bad.sys", "q 3\nn 2\nx5\n")
    code, _, err = run(capsys, "solve", path)
    assert code == EXIT_PARSE and "line 3" in err
    code, _, _ = run(capsys, "solve", str(tmp_path / "missing.sys"))
    assert code == EXIT_PARSE


def test_boolean_algorithm_on_wrong_field(tmp_path, capsys):
    path = write(tmp_path, "cube.sys", CUBE)
    code, _, _ = run(capsys, "solve", path, "--algorithm", "mfcs")
    assert code == EXIT_ALGO


def test_component_cap_exit_code(tmp_path, capsys):
    text = "q 2\nn 8\n" + "\n".join(f"x{i}*x{i + 2} + x{i + 1}" for i in range(1, 7)) + "\n"
    path = write(tmp_path, "c.sys", text)
    code, out, _ = run(capsys, "solve", path, "-a", "tdcs2", "--max-components", "2", "--json")
    rep = json.loads(out)
    assert code == EXIT_CAP and rep["status"] == "partial" and "total_count" not in rep


def test_matmul_pipeline(tmp_path, capsys):
    sys_path = str(tmp_path / "m2.sys")
    code, _, _ = run(capsys, "generate", "matmul", "--n", "2", "-o", sys_path)
    assert code == EXIT_OK
    rep_path = str(tmp_path / "m2.json")
    code, _, _ = run(capsys, "solve", sys_path, "-a", "mfcs", "-o", rep_path)
    assert json.loads(open(rep_path).read())["total_count"] == "6"
    code, out, _ = run(capsys, "verify", "-d", rep_path, "-c", sys_path + ".check")
    assert code == EXIT_OK and out.startswith("ok")
    one = write(tmp_path, "one.sys", "q 2\nn 8\n1\n")
    zero = write(tmp_path, "zero.sys", "q 2\nn 8\n0\n")
    assert run(capsys, "verify", "-d", rep_path, "-c", one)[0] == EXIT_VERIFY
    assert run(capsys, "verify", "-d", rep_path, "-c", zero)[0] == EXIT_OK


def test_generate_shapes(tmp_path, capsys):
    from finchar.system import read_system
    out = str(tmp_path / "nfg.sys")
    code, _, _ = run(capsys, "generate", "nfg", "--filter", "canfil5", "--L", "40", "--feedback", "40,21,19,2,0",
                     "--taps", "0,1,2,3,4,5,6", "--keybits", "40", "--seed", "7", "--plant", "-o", out)
    s = read_system(out)
    assert code == EXIT_OK and s.n == 40 and len(s.polys) == 40
    side = json.loads(open(out + ".json").read())
    planted = tuple(int(c) for c in side["planted"])
    assert all(p.eval(planted) == 0 for p in s.polys)

    out = str(tmp_path / "biv.sys")
    run(capsys, "generate", "bivium", "--clocks", "10", "--seed", "1", "-o", out)
    s = read_system(out)
    assert s.n == 197 and len(s.polys) == 30

    out = str(tmp_path / "mm.sys")
    run(capsys, "generate", "matmul", "--n", "3", "-o", out)
    assert read_system(out).n == 18 and len(read_system(out).polys) == 9
    assert len(read_system(out + ".check").polys) == 9


def test_generate_rejects_mismatched_length(capsys):
    code, _, _ = run(capsys, "generate", "nfg", "--L", "30", "--feedback", "40,21,19,2,0")
    assert code == EXIT_PARSE


def test_oracle_command(tmp_path, capsys):
    path = write(tmp_path, "cube.sys", CUBE)
    code, out, _ = run(capsys, "oracle", path)
    assert json.loads(out)["count"] == "4"
    code, out, _ = run(capsys, "oracle", path, "--max-points", "10")
    assert code == EXIT_CAP


def test_bench_matmul(tmp_path, capsys):
    path = str(tmp_path / "b.csv")
    code, _, _ = run(capsys, "bench", "matmul", "--sizes", "2,3", "--repeat", "3", "--csv", path)
    rows = list(csv.DictReader(open(path)))
    assert code == EXIT_OK and [r["instance"] for r in rows] == ["matmul-2", "matmul-3"]
    for r, n in zip(rows, (8, 18)):
        assert Fraction(float(r["R"])) == Fraction(int(r["N_C"]), 2 ** n)


def test_thread_count_does_not_change_report(tmp_path, capsys):
    sys_path = str(tmp_path / "m3.sys")
    run(capsys, "generate", "matmul", "--n", "3", "-o", sys_path)
    outs = []
    for t in ("1", "4", "1"):
        code, out, _ = run(capsys, "solve", sys_path, "-a", "mfcs", "--json", "--threads", t)
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]


def test_module_entry_point(tmp_path):
    path = write(tmp_path, "cube.sys", CUBE)
    res = subprocess.run([sys.executable, "-m", "finchar", "solve", path, "--json"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["total_count"] == "4"


def test_stdin_input(monkeypatch, capsys):
    import io
    monkeypatch.setattr(sys, "stdin", io.StringIO(CUBE))
    code, out, _ = run(capsys, "solve", "-", "--json")
    assert json.loads(out)["total_count"] == "4"


@pytest.mark.parametrize("argv", [["solve"], ["bench", "nope"], ["generate"]])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_solve_batched(tmp_path, capsys):
    sys_path = str(tmp_path / "m3.sys")
    run(capsys, "generate", "matmul", "--n", "3", "-o", sys_path)
    code, out, _ = run(capsys, "solve", sys_path, "-a", "mfcs", "--json", "--batch", "1")
    assert code == EXIT_OK and json.loads(out)["total_count"] == "168"


def test_memory_limit_exit_code(tmp_path, capsys):
    path = str(tmp_path / "m3.sys")
    run(capsys, "generate", "matmul", "--n", "3", "-o", path)
    code, out, _ = run(capsys, "solve", path, "-a", "mfcs", "--max-memory", "1", "--json")
    assert code == EXIT_CAP and json.loads(out)["status"] == "partial"
