import json
from fractions import Fraction
import subprocess
import sys

import pytest

from k3lat.cli import encode_int, encode_rational, main, parse_json, parse_matrix, run
from k3lat.exactlinalg import Matrix
from k3lat.isometry import RationalIsometry, compose_reflections
from k3lat.lattices import direct_sum, hyperbolic_plane, k3_lattice

X6 = [1, 3] + [0] * 20


def job(*argv):
    code, report = run(list(argv))
    return code, report


def round_trip(report):
    return json.loads(json.dumps(report))


class TestWireFormat:
    def test_rationals(self):
        assert encode_rational(3) == "3"
        assert encode_rational(Fraction(-6, 4)) == "-3/2"

    def test_integer_size_rule(self):
        assert encode_int(2 ** 53 - 1) == 2 ** 53 - 1
        assert encode_int(-(2 ** 53)) == str(-(2 ** 53))

    def test_bare_fractions_accepted(self):
        assert parse_json("[[3/2, 0], [0, \"2/3\"]]") == [["3/2", 0], [0, "2/3"]]
        assert parse_matrix(parse_json("[[-1/2]]")) == Matrix([["-1/2"]])


class TestCommands:
    def test_cyclic_type_from_reflection_file(self, tmp_path):
        path = tmp_path / "refl_x.json"
        path.write_text(json.dumps({"reflection": X6}))
        code, rep = job("cyclic-type", "--lattice", "K3", "--isometry", f"@{path}")
        assert code == 0 and rep["result"]["cyclic_type"] == 3

    def test_double_orbit_on_U(self):
        code, rep = job("double-orbit", "--lattice", "U", "--matrix", "[[3/2,0],[0,2/3]]")
        assert code == 0 and rep["result"]["pair"] == [3, 2]
        assert all(rep["verified"].values())

    def test_chern_verify(self):
        code, rep = job("chern", "verify", "--rank", "3", "--degree", "8", "--trials", "50", "--seed", "7")
        assert code == 0 and all(rep["verified"].values())

    def test_decompose_emits_valid_reflections(self):
        code, rep = job("decompose-reflections", "--lattice", "U+U",
                        "--matrix", "[[0,1,0,0],[1,0,0,0],[0,0,-1,0],[0,0,0,-1]]")
        assert code == 0
        L = direct_sum(hyperbolic_plane(), hyperbolic_plane())
        vectors = [tuple(int(x) for x in v) for v in round_trip(rep)["result"]["reflections"]]
        assert compose_reflections(L, vectors).matrix == Matrix([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]])

    def test_reduce_emits_integral_isometries(self):
        M = [[0] * 22 for _ in range(22)]
        for i in range(22):
            M[i][i] = 1
        M[0][0], M[1][1] = "5/2", "2/5"
        code, rep = job("reduce-double-orbit", "--lattice", "K3", "--matrix", json.dumps(M))
        assert code == 0 and rep["result"]["pair"] == [10, 1]
        K3 = k3_lattice()
        for key in ("g", "h"):
            g = RationalIsometry(K3, parse_matrix(round_trip(rep)["result"][key]))
            assert g.is_integral()

    def test_discriminant_lagrangians(self):
        code, rep = job("discriminant", "--lattice", "U", "--matrix", "[[3/2,0],[0,2/3]]", "--lagrangians")
        assert code == 0 and rep["result"]["lagrangian_count"] == 4

    def test_congruence(self):
        l1 = json.dumps([1, 1] + [0] * 20)
        l2 = json.dumps([1, 2] + [0] * 20)
        code, rep = job("congruence", "--l1", l1, "--l2", l2, "--n", "5")
        assert code == 0 and rep["result"] == {"k": None, "congruent": False}

    def test_mukai_commands(self):
        zero = [0] * 22
        code, rep = job("mukai", "pairing", "--v", json.dumps([0, zero, 1]), "--w", json.dumps([1, zero, 0]))
        assert code == 0 and rep["result"]["pairing"] == "-1"
        code, rep = job("mukai", "universal", "--n", "3", "--s", "2")
        assert code == 0 and rep["result"]["k"] == 2
        code, rep = job("mukai", "domain", "--n", "4", "--k", "1", "--j", "2",
                        "--x", json.dumps(X6), "--y", json.dumps([0, 0, 1] + [0] * 19))
        assert code == 0 and rep["result"]["cyclic_order"] == 2

    def test_selftest(self):
        code, rep = job("selftest")
        assert code == 0 and all(rep["verified"].values())


class TestExitCodes:
    def test_parse_error(self):
        assert job("cyclic-type", "--lattice", "U", "--matrix", "[[1,0],[0,")[0] == 2
        assert job("cyclic-type", "--lattice", "Z5", "--matrix", "[[1]]")[0] == 2
        assert job("no-such-command")[0] == 2

    def test_precondition(self):
        assert job("cyclic-type", "--lattice", "U", "--matrix", "[[1,0],[0,2]]")[0] == 3
        assert job("mukai", "universal", "--n", "4", "--s", "2")[0] == 3

    def test_missing_file(self):
        assert job("cyclic-type", "--lattice", "U", "--isometry", "@/nonexistent.json")[0] == 2


class TestDeterminism:
    def payload(self, *argv):
        rep = run(list(argv))[1]
        rep.pop("timing")
        return json.dumps(rep, sort_keys=True)

    def test_same_seed_same_payload(self):
        argv = ("chern", "verify", "--trials", "5", "--seed", "11")
        assert self.payload(*argv) == self.payload(*argv)

    def test_env_seed_overrides(self, monkeypatch):
        x, y = json.dumps(X6), json.dumps([0, 0, 1] + [0] * 19)
        argv = ("mukai", "domain", "--n", "6", "--k", "1", "--j", "1", "--x", x, "--y", y)
        monkeypatch.setenv("K3LAT_SEED", "5")
        a = self.payload(*argv, "--seed", "1")
        b = self.payload(*argv, "--seed", "2")
        assert a == b


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "k3lat", "double-orbit", "--lattice", "U",
                           "--matrix", "[[3/2,0],[0,2/3]]"], capture_output=True, text=True)
    assert proc.returncode == 0
    lines = proc.stdout.strip().splitlines()
    assert len(lines) == 1 and json.loads(lines[0])["result"]["pair"] == [3, 2]


def test_subprocess_precondition_exit():
    proc = subprocess.run([sys.executable, "-m", "k3lat", "cyclic-type", "--lattice", "U",
                           "--matrix", "[[1,0],[0,2]]"], capture_output=True, text=True)
    assert proc.returncode == 3 and proc.stdout == "" and "precondition" in proc.stderr


def test_main_prints_one_line(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert out.count("\n") == 1
