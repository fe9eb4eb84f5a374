import itertools
import json
import random

import pytest

from finclone.rig import (
    EXPECTED_VERDICTS,
    REGISTRY_NAMES,
    FiniteRig,
    MatrixValue,
    RigFormatError,
    builtin_rigs,
    dump_rig,
    load_rig,
    matrix_multiply,
    opposite,
    rig_from_json,
    validate_rig,
    validate_sub_rig,
)


@pytest.mark.parametrize("name", REGISTRY_NAMES)
def test_registry_verdicts(rigs, name):
    rig = rigs[name]
    rep = validate_rig(rig)
    want = EXPECTED_VERDICTS[name]
    assert rep.ok == want["ok"]
    assert rep.is_ring == want["is_ring"]
    assert rig.is_commutative == want["commutative"]


def test_registry_json_matches_builtin(rigs):
    for name, rig in builtin_rigs().items():
        assert rigs[name] == rig


def test_bool2_encoding(rigs):
    b = rigs["bool2"]
    assert (b.zero, b.one) == (1, 0)
    assert [b.plus(x, y) for x, y in itertools.product(range(2), repeat=2)] == [0, 0, 0, 1]
    assert [b.times(x, y) for x, y in itertools.product(range(2), repeat=2)] == [0, 1, 1, 1]


def test_noncommutative_add_witness():
    rig = FiniteRig.from_functions("bad", 2, lambda a, b: 0 if (a, b) == (0, 1) else a ^ b,
                                   lambda a, b: a * b, 0, 1)
    rep = validate_rig(rig)
    assert not rep.ok
    assert ("add-commutative", (0, 1)) in rep.violations


def test_json_roundtrip(tmp_path, rigs):
    for rig in rigs.values():
        p = tmp_path / f"{rig.name}.json"
        dump_rig(rig, p)
        again = load_rig(p)
        assert again == rig and again.name == rig.name


@pytest.mark.parametrize("mutate, fragment", [
    (lambda d: d.pop("mul"), "missing field 'mul'"),
    (lambda d: d.__setitem__("size", "2"), "size"),
    (lambda d: d["add"][1].__setitem__(0, 5), "add[1][0]"),
    (lambda d: d["mul"].pop(), "mul: expected 2 rows"),
    (lambda d: d.__setitem__("one", 7), "one"),
    (lambda d: d["add"][0].__setitem__(1, True), "add[0][1]"),
])
def test_malformed_json(mutate, fragment, rigs):
    doc = rigs["z2"].to_json()
    mutate(doc)
    with pytest.raises(RigFormatError, match=fragment.replace("[", r"\[").replace("]", r"\]")):
        rig_from_json(doc)


def test_truncated_file(tmp_path):
    p = tmp_path / "t.json"
    p.write_text('{"name": "z2", "size": 2, "add": [[0, 1]')
    with pytest.raises(RigFormatError, match="invalid JSON"):
        load_rig(p)


def test_opposite(rigs):
    assert opposite(rigs["z3"]) == rigs["z3"]
    assert opposite(rigs["bool2"]) == rigs["bool2"]
    nc = rigs["nc4"]
    op = opposite(nc)
    assert op != nc
    for a, b in itertools.product(range(4), repeat=2):
        assert op.times(a, b) == nc.times(b, a)
    assert opposite(op) == nc and opposite(op).name == "nc4"
    assert validate_rig(op).ok


def test_sub_rig():
    rigs = builtin_rigs()
    rep = validate_sub_rig(rigs["z2"], {0, 1})
    assert rep.ok and rep.sub_rig == rigs["z2"]
    rep = validate_sub_rig(rigs["z3"], {0, 1})
    assert not rep.ok and ("closed-add", (1, 1)) in rep.violations
    assert validate_sub_rig(rigs["bool2"], {0, 1}).ok
    with pytest.raises(RigFormatError):
        validate_sub_rig(rigs["z2"], {5})


def test_matrix_examples(rigs):
    z3, z2, b = rigs["z3"], rigs["z2"], rigs["bool2"]
    a = MatrixValue(z3, 2, 3, (1, 2, 0, 2, 2, 1))
    assert matrix_multiply(MatrixValue.identity(z3, 2), a) == a
    row = MatrixValue(z2, 1, 2, (1, 1))
    col = MatrixValue(z2, 2, 1, (1, 1))
    assert matrix_multiply(row, col).entries == (0,)
    # row (bottom, top) times column (top, bottom)
    assert matrix_multiply(MatrixValue(b, 1, 2, (0, 1)), MatrixValue(b, 2, 1, (1, 0))).entries == (1,)


def random_matrix(rng, rig, r, c):
    return MatrixValue(rig, r, c, tuple(rng.randrange(rig.size) for _ in range(r * c)))


@pytest.mark.parametrize("name", REGISTRY_NAMES)
def test_matrix_associativity_and_units(rigs, name):
    rig = rigs[name]
    rng = random.Random(name)
    for _ in range(1000):
        l, m, n, p = (rng.randint(1, 3) for _ in range(4))
        a, b, c = random_matrix(rng, rig, n, p), random_matrix(rng, rig, m, n), random_matrix(rng, rig, l, m)
        assert matrix_multiply(c, matrix_multiply(b, a)) == matrix_multiply(matrix_multiply(c, b), a)
        assert matrix_multiply(MatrixValue.identity(rig, n), a) == a
        assert matrix_multiply(a, MatrixValue.identity(rig, p)) == a


def test_matrix_shape_mismatch(rigs):
    z2 = rigs["z2"]
    with pytest.raises(ValueError):
        matrix_multiply(MatrixValue.identity(z2, 2), MatrixValue.identity(z2, 3))
