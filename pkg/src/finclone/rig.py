"""Finite rigs (semirings), validation, opposites, sub-rigs and matrices."""
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from finclone.finset import InputError, OpTable


class RigFormatError(InputError):
    pass


@dataclass(frozen=True)
class FiniteRig:
    name: str = field(compare=False)
    size: int
    add: OpTable
    mul: OpTable
    zero: int
    one: int
    positive: tuple | None = None

    def __post_init__(self):
        if self.size < 1:
            raise RigFormatError("size must be positive")
        for label, op in (("add", self.add), ("mul", self.mul)):
            if op.carrier_size != self.size or op.arity != 2:
                raise RigFormatError(f"{label} must be a binary table on {self.size} elements")
        for label, v in (("zero", self.zero), ("one", self.one)):
            if not 0 <= v < self.size:
                raise RigFormatError(f"{label}={v} outside carrier")
        if self.positive is not None:
            pos = tuple(sorted(set(int(p) for p in self.positive)))
            object.__setattr__(self, "positive", pos)

    @classmethod
    def from_functions(cls, name, size, add, mul, zero, one, positive=None):
        return cls(name, size, OpTable.from_function(size, 2, add),
                   OpTable.from_function(size, 2, mul), zero, one, positive)

    @property
    def elements(self):
        return range(self.size)

    def plus(self, a, b):
        return self.add.table[a * self.size + b]

    def times(self, a, b):
        return self.mul.table[a * self.size + b]

    def sum(self, xs):
        acc = self.zero
        for x in xs:
            acc = self.plus(acc, x)
        return acc

    @property
    def is_commutative(self):
        s = self.size
        return all(self.times(a, b) == self.times(b, a) for a in range(s) for b in range(s))

    @property
    def is_degenerate(self):
        return self.zero == self.one

    def to_json(self):
        s = self.size
        d = {
            "name": self.name,
            "size": s,
            "zero": self.zero,
            "one": self.one,
            "add": [list(self.add.table[i * s:(i + 1) * s]) for i in range(s)],
            "mul": [list(self.mul.table[i * s:(i + 1) * s]) for i in range(s)],
        }
        if self.positive is not None:
            d["positive"] = list(self.positive)
        return d


def _check_int(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise RigFormatError(f"{where}: expected integer, got {value!r}")
    return value


def rig_from_json(data) -> FiniteRig:
    """Build a rig from the JSON schema, with position-precise errors."""
    if not isinstance(data, dict):
        raise RigFormatError("rig document must be a JSON object")
    for key in ("name", "size", "zero", "one", "add", "mul"):
        if key not in data:
            raise RigFormatError(f"missing field {key!r}")
    name = data["name"]
    if not isinstance(name, str):
        raise RigFormatError("name: expected string")
    size = _check_int(data["size"], "size")
    if size < 1:
        raise RigFormatError(f"size: must be positive, got {size}")
    tables = {}
    for key in ("add", "mul"):
        rows = data[key]
        if not isinstance(rows, list) or len(rows) != size:
            raise RigFormatError(f"{key}: expected {size} rows")
        flat = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != size:
                raise RigFormatError(f"{key}[{i}]: expected {size} entries")
            for j, v in enumerate(row):
                _check_int(v, f"{key}[{i}][{j}]")
                if not 0 <= v < size:
                    raise RigFormatError(f"{key}[{i}][{j}]: entry {v} outside 0..{size - 1}")
                flat.append(v)
        tables[key] = OpTable(size, 2, tuple(flat))
    zero = _check_int(data["zero"], "zero")
    one = _check_int(data["one"], "one")
    for key, v in (("zero", zero), ("one", one)):
        if not 0 <= v < size:
            raise RigFormatError(f"{key}: {v} outside 0..{size - 1}")
    positive = data.get("positive")
    if positive is not None:
        if not isinstance(positive, list):
            raise RigFormatError("positive: expected list")
        for i, v in enumerate(positive):
            _check_int(v, f"positive[{i}]")
            if not 0 <= v < size:
                raise RigFormatError(f"positive[{i}]: {v} outside 0..{size - 1}")
        positive = tuple(positive)
    return FiniteRig(name, size, tables["add"], tables["mul"], zero, one, positive)


def load_rig(path) -> FiniteRig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RigFormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return rig_from_json(data)


def dump_rig(rig, path):
    d = rig.to_json()
    lines = []
    for key, val in d.items():
        if key in ("add", "mul"):
            rows = ",\n    ".join(json.dumps(row) for row in val)
            lines.append(f'  "{key}": [\n    {rows}\n  ]')
        else:
            lines.append(f"  {json.dumps(key)}: {json.dumps(val)}")
    Path(path).write_text("{\n" + ",\n".join(lines) + "\n}\n", encoding="utf-8")


# ----------------------------------------------------------------------------
# validation

@dataclass
class ValidationReport:
    ok: bool
    violations: list
    is_ring: bool = False
    degenerate: bool = False
    sub_rig: FiniteRig | None = None

    def to_json(self):
        d = {
            "ok": self.ok,
            "is_ring": self.is_ring,
            "degenerate": self.degenerate,
            "violations": [{"axiom": a, "witness": list(w)} for a, w in self.violations],
        }
        if self.sub_rig is not None:
            d["sub_rig"] = self.sub_rig.to_json()
        return d


def validate_rig(r: FiniteRig) -> ValidationReport:
    """Exhaustive axiom check; lists every violated instance."""
    E = r.elements
    p, t = r.plus, r.times
    bad = []
    for a in E:
        if p(r.zero, a) != a or p(a, r.zero) != a:
            bad.append(("add-unit", (a,)))
        if t(r.one, a) != a or t(a, r.one) != a:
            bad.append(("mul-unit", (a,)))
        if t(r.zero, a) != r.zero or t(a, r.zero) != r.zero:
            bad.append(("zero-annihilates", (a,)))
        for b in E:
            if p(a, b) != p(b, a):
                bad.append(("add-commutative", (a, b)))
            for c in E:
                if p(p(a, b), c) != p(a, p(b, c)):
                    bad.append(("add-associative", (a, b, c)))
                if t(t(a, b), c) != t(a, t(b, c)):
                    bad.append(("mul-associative", (a, b, c)))
                if t(a, p(b, c)) != p(t(a, b), t(a, c)):
                    bad.append(("left-distributive", (a, b, c)))
                if t(p(a, b), c) != p(t(a, c), t(b, c)):
                    bad.append(("right-distributive", (a, b, c)))
    if r.positive is not None:
        sub = validate_sub_rig(r, r.positive)
        bad.extend(("positive:" + a, w) for a, w in sub.violations)
    ok = not bad
    is_ring = ok and all(any(p(a, b) == r.zero for b in E) for a in E)
    return ValidationReport(ok, bad, is_ring=is_ring, degenerate=r.is_degenerate)


def validate_sub_rig(r: FiniteRig, subset) -> ValidationReport:
    try:
        members = sorted(set(int(x) for x in subset))
    except (TypeError, ValueError) as exc:
        raise RigFormatError(f"subset must be a collection of integers: {exc}") from exc
    for x in members:
        if not 0 <= x < r.size:
            raise RigFormatError(f"subset element {x} outside carrier 0..{r.size - 1}")
    inside = set(members)
    bad = []
    if r.zero not in inside:
        bad.append(("contains-zero", (r.zero,)))
    if r.one not in inside:
        bad.append(("contains-one", (r.one,)))
    for a in members:
        for b in members:
            if r.plus(a, b) not in inside:
                bad.append(("closed-add", (a, b)))
            if r.times(a, b) not in inside:
                bad.append(("closed-mul", (a, b)))
    if bad:
        return ValidationReport(False, bad)
    pos = {x: i for i, x in enumerate(members)}
    m = len(members)
    sub = FiniteRig.from_functions(
        r.name + "+", m,
        lambda i, j: pos[r.plus(members[i], members[j])],
        lambda i, j: pos[r.times(members[i], members[j])],
        pos[r.zero], pos[r.one])
    full = validate_rig(sub)
    return ValidationReport(True, [], is_ring=full.is_ring,
                            degenerate=sub.is_degenerate, sub_rig=sub)


def opposite(r: FiniteRig) -> FiniteRig:
    s = r.size
    mul_t = tuple(r.mul.table[j * s + i] for i in range(s) for j in range(s))
    name = r.name[:-3] if r.name.endswith("^op") else r.name + "^op"
    return FiniteRig(name, s, r.add, OpTable(s, 2, mul_t), r.zero, r.one, r.positive)


# ----------------------------------------------------------------------------
# matrices

@dataclass(frozen=True)
class MatrixValue:
    rig: FiniteRig
    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        ent = tuple(int(e) for e in self.entries)
        object.__setattr__(self, "entries", ent)
        if len(ent) != self.rows * self.cols:
            raise InputError(f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} entries")
        for e in ent:
            if not 0 <= e < self.rig.size:
                raise InputError(f"matrix entry {e} outside carrier")

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    @classmethod
    def identity(cls, rig, n):
        return cls(rig, n, n, tuple(rig.one if i == j else rig.zero
                                    for i in range(n) for j in range(n)))


def matrix_multiply(b: MatrixValue, a: MatrixValue) -> MatrixValue:
    """``(ba)[k, i] = sum_j b[k, j] * a[j, i]`` in the rig."""
    if b.rig != a.rig:
        raise InputError("matrices over different rigs")
    if b.cols != a.rows:
        raise InputError(f"cannot multiply {b.rows}x{b.cols} by {a.rows}x{a.cols}")
    r = b.rig
    out = [r.sum(r.times(b[k, j], a[j, i]) for j in range(b.cols))
           for k in range(b.rows) for i in range(a.cols)]
    return MatrixValue(r, b.rows, a.cols, tuple(out))


# ----------------------------------------------------------------------------
# registry

REGISTRY_NAMES = ("bool2", "z2", "z3", "z4", "sat2", "nc4")


def builtin_rigs():
    """Constructors for the shipped rigs, keyed by registry name."""
    nc4_add = [[0, 1, 2, 3], [1, 1, 1, 3], [2, 1, 2, 3], [3, 3, 3, 3]]
    nc4_mul = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 2, 2], [0, 3, 3, 3]]
    return {
        # 2 = {0 < 1} with meet as addition (unit 1) and join as multiplication (unit 0)
        "bool2": FiniteRig.from_functions("bool2", 2, lambda a, b: a & b,
                                          lambda a, b: a | b, 1, 0),
        "z2": FiniteRig.from_functions("z2", 2, lambda a, b: (a + b) % 2,
                                       lambda a, b: a * b % 2, 0, 1),
        "z3": FiniteRig.from_functions("z3", 3, lambda a, b: (a + b) % 3,
                                       lambda a, b: a * b % 3, 0, 1),
        "z4": FiniteRig.from_functions("z4", 4, lambda a, b: (a + b) % 4,
                                       lambda a, b: a * b % 4, 0, 1),
        "sat2": FiniteRig.from_functions("sat2", 3, lambda a, b: min(a + b, 2),
                                         lambda a, b: min(a * b, 2), 0, 1),
        # join on the chain 0 < 2 < 1 < 3; {2, 3} is a left-zero band under mul
        "nc4": FiniteRig.from_functions("nc4", 4, lambda a, b: nc4_add[a][b],
                                        lambda a, b: nc4_mul[a][b], 0, 1),
    }


EXPECTED_VERDICTS = {
    "bool2": {"ok": True, "is_ring": False, "commutative": True},
    "z2": {"ok": True, "is_ring": True, "commutative": True},
    "z3": {"ok": True, "is_ring": True, "commutative": True},
    "z4": {"ok": True, "is_ring": True, "commutative": True},
    "sat2": {"ok": True, "is_ring": False, "commutative": True},
    "nc4": {"ok": True, "is_ring": False, "commutative": False},
}


def registry_dir():
    return resources.files("finclone") / "data" / "rigs"


def registry():
    """Shipped rigs loaded from the packaged JSON files."""
    out = {}
    for name in REGISTRY_NAMES:
        with resources.as_file(registry_dir() / f"{name}.json") as p:
            out[name] = load_rig(p)
    return out


def get_rig(name_or_path) -> FiniteRig:
    if name_or_path in REGISTRY_NAMES:
        return registry()[name_or_path]
    return load_rig(name_or_path)
