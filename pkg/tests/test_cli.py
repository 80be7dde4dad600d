import io
import json

import jsonschema
import pytest

from gfermat.cli import load_schema, run


def _run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def _json(argv):
    code, out, _ = _run(argv + ["--json"])
    env = json.loads(out)
    jsonschema.validate(env, load_schema(env["command"]))
    return code, env


def test_solve_examples():
    code, env = _json(["solve", "29", "19", "--n", "3"])
    assert code == 0 and env["result"]["status"] == "Solvable"
    assert tuple(env["result"]["witness"]) in {("7", "4", "3"), ("22", "1", "3"), ("8", "47", "15")}
    code, out, _ = _run(["solve", "29", "3", "--n", "3"])
    assert code == 0 and "Unsolvable" in out
    code, out, _ = _run(["solve", "60507", "69", "--n", "3"])
    assert code == 2 and "Undecided" in out


@pytest.mark.parametrize("B,C", [(83, 23), (83, 207), (6723, 23), (6723, 69), (544563, 69),
                                 (60507, 69), (29, 3), (339, 29), (29, 19), (3, 31), (243, 93)])
def test_golden_corpus_validates(B, C):
    code, env = _json(["solve", str(B), str(C), "--trace"])
    assert code in (0, 2)
    assert all(isinstance(v, str) for v in env["input"].values() if not isinstance(v, (bool, type(None))))


def test_other_commands_validate():
    for argv in (["local", "1", "3"], ["local", "7", "2", "--p", "2"], ["global", "29", "19"],
                 ["global", "3", "124", "--tilde"], ["oracle", "29", "19", "--zmax", "15", "--filter", "star0=3"],
                 ["classgroup", "-332"], ["classgroup", "229"], ["stats", "sweep", "--T", "20"],
                 ["stats", "sweep", "--T", "8", "--mode", "global"], ["stats", "constants", "--X", "1000"]):
        code, env = _json(argv)
        assert code == 0, argv


def test_bit_identical():
    a = _run(["solve", "544563", "69", "--json"])
    b = _run(["solve", "544563", "69", "--json"])
    assert a == b


def test_timings_only_on_request():
    _, out, _ = _run(["--timings", "classgroup", "-116", "--json"])
    assert "total_seconds" in json.loads(out)["timings"]


@pytest.mark.parametrize("argv,needle", [
    (["solve", "0", "3"], "B must be nonzero"),
    (["solve", "3", "0"], "C must be nonzero"),
    (["solve", "3", "5", "--n", "4"], "n must be odd"),
    (["solve", "x", "5"], "invalid int"),
    (["solve", "3", "5", "--bogus"], "unrecognized"),
    (["local", "3", "5", "--p", "4"], "p must be prime"),
    (["classgroup", "7"], "discriminant"),
    (["oracle", "3", "5", "--filter", "nope"], "bad filter"),
    (["global", "9", "3"], "gcd"),
    (["stats", "sweep", "--T", "200000"], "cap"),
    ([], "required"),
])
def test_usage_errors(argv, needle):
    code, out, err = _run(argv)
    assert code == 1 and out == ""
    assert needle in err
