import json

import pytest

from adtypes.cli import run


def _read(path):
    with open(path) as fh:
        return json.load(fh)


def test_solve_example1(fixtures_dir, tmp_path):
    out = tmp_path / "sol.json"
    code = run(["solve", "--in", str(fixtures_dir / "example1.json"),
                "--out", str(out)])
    assert code == 0
    sol = _read(out)
    assert sol["welfare"] == 9.0
    assert {(e["slot"], e["type"]) for e in sol["assignment"]} == {(0, 1), (1, 0)}
    assert sol["duals"] is not None


@pytest.mark.parametrize("algo", ["adtypes", "generic", "greedy", "brute",
                                  "two-type"])
def test_solve_all_algorithms(fixtures_dir, tmp_path, algo):
    out = tmp_path / f"{algo}.json"
    code = run(["solve", "--in", str(fixtures_dir / "example1.json"),
                "--algo", algo, "--out", str(out)])
    assert code == 0
    expected = 8.5 if algo == "greedy" else 9.0
    assert _read(out)["welfare"] == expected


def test_solve_gapdp(fixtures_dir, tmp_path):
    out = tmp_path / "gap.json"
    code = run(["solve", "--in", str(fixtures_dir / "gap_small.json"),
                "--algo", "gapdp", "--out", str(out)])
    assert code == 0
    assert _read(out)["welfare"] > 0


def test_verify_round_trip(fixtures_dir, tmp_path, capsys):
    inst = str(fixtures_dir / "example1.json")
    out = tmp_path / "sol.json"
    assert run(["solve", "--in", inst, "--out", str(out)]) == 0
    assert run(["verify", "--in", inst, "--sol", str(out)]) == 0
    assert "ok:" in capsys.readouterr().out


def test_verify_rejects_corrupted_solution(fixtures_dir, tmp_path, capsys):
    inst = str(fixtures_dir / "example1.json")
    out = tmp_path / "sol.json"
    run(["solve", "--in", inst, "--out", str(out)])
    sol = _read(out)
    sol["duals"]["p"][0] -= 1.0
    out.write_text(json.dumps(sol))
    assert run(["verify", "--in", inst, "--sol", str(out)]) == 1
    assert "violation" in capsys.readouterr().out


def test_price_vcg_two_bidders(fixtures_dir, tmp_path):
    out = tmp_path / "priced.json"
    code = run(["price", "--in", str(fixtures_dir / "two_bidders.json"),
                "--mechanism", "vcg", "--out", str(out)])
    assert code == 0
    priced = _read(out)
    assert priced["mechanism"] == "vcg"
    pays = {(p["type"], p["rank"]): p["pay"] for p in priced["payments"]}
    assert pays[(0, 0)] == 3.0
    assert pays[(0, 1)] == 0.0


def test_price_with_reserves_file(fixtures_dir, tmp_path):
    reserves = tmp_path / "r.json"
    reserves.write_text(json.dumps([{"type": 0, "rank": 0, "reserve": 4.0}]))
    out = tmp_path / "priced.json"
    code = run(["price", "--in", str(fixtures_dir / "two_bidders.json"),
                "--mechanism", "reserve", "--reserves", str(reserves),
                "--out", str(out)])
    assert code == 0
    priced = _read(out)
    pays = {(p["type"], p["rank"]): p["pay"] for p in priced["payments"]}
    # reserve changepoint at 4 (quantity 1/2) plus the rival's at 6 (to 1)
    assert pays[(0, 0)] == 5.0
    assert pays[(0, 1)] == 0.0


def test_price_myerson_greedy(fixtures_dir, tmp_path):
    out = tmp_path / "priced.json"
    code = run(["price", "--in", str(fixtures_dir / "greedy_tight_25.json"),
                "--mechanism", "myerson-greedy", "--out", str(out)])
    assert code == 0
    assert _read(out)["mechanism"] == "myerson-greedy"


def test_gen_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["gen", "--family", "random", "--seed", "9", "--n", "5",
            "--k", "2"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_mis_family(fixtures_dir, tmp_path):
    out = tmp_path / "mis.json"
    code = run(["gen", "--family", "mis",
                "--graph", str(fixtures_dir / "triangle.graph"),
                "--out", str(out)])
    assert code == 0
    data = _read(out)
    assert data["num_slots"] == 3
    assert len(data["types"]) == 3
    assert data["gap"][0][1] == 3


def test_gen_greedy_tight_and_solve(tmp_path):
    inst = tmp_path / "tight.json"
    assert run(["gen", "--family", "greedy-tight", "--epsilon", "0.125",
                "--out", str(inst)]) == 0
    sol = tmp_path / "sol.json"
    assert run(["solve", "--in", str(inst), "--out", str(sol)]) == 0
    assert _read(sol)["welfare"] == 1.875


def test_gen_assignment_family(tmp_path, capsys):
    out = tmp_path / "asg.json"
    assert run(["gen", "--family", "assignment", "--n", "4", "--seed", "2",
                "--out", str(out)]) == 0
    assert "offset=" in capsys.readouterr().out
    assert len(_read(out)["types"]) == 4


def test_guard_refusal_exit_code(tmp_path):
    inst = tmp_path / "big.json"
    assert run(["gen", "--family", "random", "--n", "12", "--k", "2",
                "--seed", "0", "--out", str(inst)]) == 0
    assert run(["solve", "--in", str(inst), "--algo", "brute",
                "--out", str(tmp_path / "x.json")]) == 2


def test_validation_failure_exit_code(fixtures_dir, tmp_path):
    # gap instance fed to the gap-free solver
    assert run(["solve", "--in", str(fixtures_dir / "gap_small.json"),
                "--algo", "adtypes", "--out", str(tmp_path / "x.json")]) == 1


def test_unknown_flag_exit_code(capsys):
    assert run(["solve", "--frobnicate"]) == 64
    assert "usage" in capsys.readouterr().err.lower()


def test_bench_csv(tmp_path):
    out = tmp_path / "report.csv"
    assert run(["bench", "--sizes", "10:2,20:2", "--reps", "1",
                "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "n,k,solver,median_ms,welfare"
    assert len(lines) == 5


def test_trace_flag(fixtures_dir, tmp_path, capsys):
    assert run(["solve", "--in", str(fixtures_dir / "example1.json"),
                "--trace", "--out", str(tmp_path / "s.json")]) == 0
    err = capsys.readouterr().err
    assert "phase=0" in err and "pathlen=" in err
