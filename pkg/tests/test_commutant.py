import itertools
import random

import pytest

from finclone.commutant import (
    affine_commutant_check,
    commutant_slice,
    commutant_theory,
    commutes,
    double_commutant_slice,
    is_balanced,
    is_commutative,
    is_homomorphism,
    is_saturated,
    mutual_commutant_check,
)
from finclone.finset import OpTable, constant, encode_tuple, projection
from finclone.rig import REGISTRY_NAMES
from finclone.theory import (
    ConcreteTheory,
    TheorySlice,
    clone_closure,
    full_theory,
    initial_theory,
    mat_aff_theory,
    mat_slice,
    mat_theory,
    slice_compare,
)

AND = OpTable(2, 2, (0, 0, 0, 1))
OR = OpTable(2, 2, (0, 1, 1, 1))
NOT = OpTable(2, 1, (1, 0))


def brute_commutant(s, n, gens):
    """Keep every table h on s^n with h(g(x^1..x^k)) == g(h(x^1)..h(x^k))."""
    cells = list(itertools.product(range(s), repeat=n))
    out = set()
    for table in itertools.product(range(s), repeat=len(cells)):
        ok = all(
            table[encode_tuple(s, tuple(g(*[a[i] for a in args]) for i in range(n)))]
            == g(*[table[encode_tuple(s, a)] for a in args])
            for g in gens for args in itertools.product(cells, repeat=g.arity))
        if ok:
            out.add(table)
    return out


def test_hom_examples(rigs):
    z2 = mat_theory(rigs["z2"])
    for p in (projection(2, 2, 1), projection(2, 2, 2)):
        assert is_homomorphism(z2.generators, p)
    assert is_homomorphism(mat_theory(rigs["bool2"]).generators, AND)
    bad = is_homomorphism(z2.generators, NOT)
    assert not bad
    assert bad.op.arity == 2 and bad.arguments == ((0,), (0,))


def test_commutant_examples(rigs):
    b = rigs["bool2"]
    assert commutant_slice(mat_theory(b), 2) == mat_slice(b, 2)
    assert len(commutant_slice(initial_theory(2), 2)) == 16
    aff = commutant_slice(mat_aff_theory(b), 1)
    assert aff.as_set() == {(0, 1), (0, 0), (1, 1)}


@pytest.mark.parametrize("name", ["bool2", "z2", "z3", "sat2"])
def test_commutant_vs_brute_force(rigs, name):
    rig = rigs[name]
    t = mat_theory(rig)
    n_max = 2 if rig.size == 2 else 1
    for n in range(n_max + 1):
        assert commutant_slice(t, n).as_set() == brute_commutant(rig.size, n, t.generators)


def test_both_backends_agree(rigs):
    t = mat_theory(rigs["z3"])
    a = commutant_slice(t, 2, backend="numpy")
    b = commutant_slice(t, 2, backend="numba")
    assert a == b


def theory_from(gens, s=2, K=2):
    return clone_closure(s, gens, K)


GEN_POOL = [AND, OR, NOT, constant(2, 0, 0), constant(2, 0, 1), OpTable(2, 2, (0, 1, 1, 0))]


@pytest.mark.parametrize("seed", range(8))
def test_galois_antitone_and_unit(seed):
    rng = random.Random(seed)
    small = rng.sample(GEN_POOL, 1)
    large = small + rng.sample(GEN_POOL, 2)
    for n in range(3):
        c_small = commutant_slice(theory_from(small), n)
        c_large = commutant_slice(theory_from(large), n)
        assert c_large.as_set() <= c_small.as_set()
    t = theory_from(small)
    for n in range(3):
        assert t.slice(n).as_set() <= double_commutant_slice(t, n, max_arity=2).as_set()


@pytest.mark.parametrize("seed", range(6))
def test_commutes_symmetric(seed):
    rng = random.Random(100 + seed)
    t1 = theory_from(rng.sample(GEN_POOL, 1))
    t2 = theory_from(rng.sample(GEN_POOL, 1))
    assert commutes(t1, t2, 2).ok == commutes(t2, t1, 2).ok


def test_commutes_examples(rigs):
    for rig in rigs.values():
        if rig.is_commutative and rig.size <= 3:
            from finclone.rig import opposite
            assert commutes(mat_theory(rig), mat_theory(opposite(rig)), 2).ok
    assert commutes(initial_theory(2), full_theory(2), 3).ok
    v = commutes(full_theory(2), full_theory(2), 2)
    assert not v.ok and v.witnesses


def test_commutative_verdicts(rigs):
    assert is_commutative(mat_theory(rigs["bool2"])).ok
    v = is_commutative(mat_theory(rigs["nc4"]), 1)
    assert not v.ok and v.witnesses
    assert is_commutative(initial_theory(2)).ok


@pytest.mark.parametrize("name", REGISTRY_NAMES)
def test_balance(rigs, name):
    rig = rigs[name]
    v = is_balanced(mat_theory(rig))
    assert v.ok == rig.is_commutative
    if not rig.is_commutative:
        assert v.witnesses


def test_saturation(rigs):
    aff = mat_aff_theory(rigs["bool2"])
    assert is_saturated(aff).ok
    assert not is_balanced(aff).ok
    sat = is_saturated(initial_theory(2), 3)
    assert sat.ok and sat.note.startswith("certified")


def test_mutual_commutant_z3():
    from finclone.rig import registry
    assert mutual_commutant_check(registry()["z3"], 2).ok


@pytest.mark.parametrize("name, converse_holds", [
    ("bool2", True), ("z2", True), ("z3", True), ("sat2", False), ("nc4", False)])
def test_affine_commutant(rigs, name, converse_holds):
    rig = rigs[name]
    assert affine_commutant_check(rig, 2, converse=False).ok
    assert affine_commutant_check(rig, 2).ok == converse_holds


def test_known_generators_rejected_when_wrong():
    from finclone.theory import ConsistencyError
    with pytest.raises(ConsistencyError):
        commutant_theory(initial_theory(2), 2, known_generators=[AND])
