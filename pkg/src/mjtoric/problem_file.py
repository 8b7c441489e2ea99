"""TOML problem files with exact rationals.

Rational quantities are integers or ``"p/q"`` strings; a TOML float in any
rational field is a parse error, as is any key not listed below.

    version = 1

    [fan]
    normals = [[1, 0], [0, 1], [-1, -1]]

    [classes]
    beta = ["0", "0", "1"]
    alpha = ["0", "0", "1"]

    [hamiltonian]
    a_v = ["1", "0"]
    c = "3"                    # optional, defaults to c_X

    [solver]                   # all optional
    grid = 129
    margin = "1/50"
    tol = 1e-6
    max_steps = 1000000
    gamma = 0.2
    record_every = 100
    boundary = "zero"          # or "oracle"
    seed = 0

    [output]
    dir = "out"
"""

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ParseError

FORMAT_VERSION = 1

_SCHEMA = {
    "": {"version"},
    "fan": {"normals"},
    "classes": {"beta", "alpha"},
    "hamiltonian": {"a_v", "c"},
    "solver": {"grid", "margin", "tol", "max_steps", "gamma", "record_every", "boundary", "seed"},
    "output": {"dir"},
}


@dataclass
class SolverOptions:
    grid: int = 129
    margin: Fraction = Fraction(1, 50)
    tol: float = 1e-6
    max_steps: int = 1_000_000
    gamma: float = 0.2
    record_every: int = 100
    boundary: str = "zero"
    seed: int = 0


@dataclass
class ProblemFile:
    version: int
    normals: List[Tuple[int, ...]]
    beta: List[Fraction]
    alpha: List[Fraction]
    a_v: List[Fraction]
    c: Optional[Fraction] = None
    solver: SolverOptions = field(default_factory=SolverOptions)
    out_dir: Optional[str] = None
    path: Optional[str] = None

    @property
    def n(self) -> int:
        return len(self.normals[0]) if self.normals else 0

    def echo(self) -> dict:
        return {
            "version": self.version,
            "normals": [list(u) for u in self.normals],
            "beta": [str(x) for x in self.beta],
            "alpha": [str(x) for x in self.alpha],
            "a_v": [str(x) for x in self.a_v],
            "c": None if self.c is None else str(self.c),
        }


class _Locator:
    """Line and column of ``key`` inside ``[table]`` in the raw text."""

    def __init__(self, text: str):
        self.lines = text.splitlines()

    def find(self, table: str, key: str):
        current = ""
        pat = re.compile(rf"^\s*{re.escape(key)}\s*=\s*")
        for i, line in enumerate(self.lines, 1):
            head = re.match(r"^\s*\[([^\]]+)\]", line)
            if head:
                current = head.group(1).strip()
                continue
            m = pat.match(line)
            if m and current == table:
                return i, m.end() + 1
        return None, None


def _tomlerror(exc) -> ParseError:
    msg = str(exc)
    m = re.search(r"\(at line (\d+), column (\d+)\)", msg)
    if m:
        return ParseError(msg[:m.start()].strip(), int(m.group(1)), int(m.group(2)))
    return ParseError(msg)


def parse_text(text: str, path: Optional[str] = None) -> ProblemFile:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise _tomlerror(exc) from None
    loc = _Locator(text)

    def fail(table, key, message):
        line, col = loc.find(table, key)
        where = f"{table}.{key}" if table else key
        raise ParseError(f"{where}: {message}", line, col)

    for key, value in raw.items():
        if isinstance(value, dict):
            if key not in _SCHEMA or key == "":
                raise ParseError(f"unknown table [{key}]", *_table_line(loc, key))
            for sub in value:
                if sub not in _SCHEMA[key]:
                    fail(key, sub, "unknown key")
        elif key not in _SCHEMA[""]:
            fail("", key, "unknown key")

    def need(table, key):
        section = raw.get(table, {})
        if key not in section:
            raise ParseError(f"missing required key {table}.{key}")
        return section[key]

    def rational(table, key, value):
        if isinstance(value, bool) or isinstance(value, float):
            fail(table, key, f"{value!r} is not an exact rational; write it as a \"p/q\" string")
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, str):
            if not re.fullmatch(r"\s*[+-]?\d+(\s*/\s*[+-]?\d+)?\s*", value):
                fail(table, key, f"malformed rational {value!r}")
            try:
                return Fraction(value.replace(" ", ""))
            except ZeroDivisionError:
                fail(table, key, f"zero denominator in {value!r}")
        fail(table, key, f"expected a rational, got {type(value).__name__}")

    def rational_list(table, key):
        value = need(table, key)
        if not isinstance(value, list):
            fail(table, key, "expected a list")
        return [rational(table, key, v) for v in value]

    def integer(table, key, value, lo=None):
        if isinstance(value, bool) or not isinstance(value, int):
            fail(table, key, f"expected an integer, got {value!r}")
        if lo is not None and value < lo:
            fail(table, key, f"must be at least {lo}")
        return value

    def real(table, key, value):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            fail(table, key, f"expected a number, got {value!r}")
        return float(value)

    version = integer("", "version", raw.get("version", FORMAT_VERSION))
    if version != FORMAT_VERSION:
        fail("", "version", f"unsupported version {version}")

    normals_raw = need("fan", "normals")
    if not isinstance(normals_raw, list) or not normals_raw:
        fail("fan", "normals", "expected a nonempty list of integer vectors")
    normals = []
    for row in normals_raw:
        if not isinstance(row, list) or not row:
            fail("fan", "normals", "each normal must be a nonempty list")
        normals.append(tuple(integer("fan", "normals", v) for v in row))
    if len({len(u) for u in normals}) != 1:
        fail("fan", "normals", "normals have inconsistent lengths")

    beta = rational_list("classes", "beta")
    alpha = rational_list("classes", "alpha")
    for key, lam in (("beta", beta), ("alpha", alpha)):
        if len(lam) != len(normals):
            fail("classes", key, f"has {len(lam)} offsets for {len(normals)} normals")
    a_v = rational_list("hamiltonian", "a_v")
    if len(a_v) != len(normals[0]):
        fail("hamiltonian", "a_v", f"has length {len(a_v)}, expected {len(normals[0])}")
    ham = raw.get("hamiltonian", {})
    c = rational("hamiltonian", "c", ham["c"]) if "c" in ham else None

    opts = SolverOptions()
    sv = raw.get("solver", {})
    if "grid" in sv:
        opts.grid = integer("solver", "grid", sv["grid"], lo=3)
    if "margin" in sv:
        opts.margin = rational("solver", "margin", sv["margin"])
        if opts.margin <= 0:
            fail("solver", "margin", "must be positive")
    if "tol" in sv:
        opts.tol = real("solver", "tol", sv["tol"])
    if "max_steps" in sv:
        opts.max_steps = integer("solver", "max_steps", sv["max_steps"], lo=0)
    if "gamma" in sv:
        opts.gamma = real("solver", "gamma", sv["gamma"])
    if "record_every" in sv:
        opts.record_every = integer("solver", "record_every", sv["record_every"], lo=1)
    if "boundary" in sv:
        if sv["boundary"] not in ("zero", "oracle"):
            fail("solver", "boundary", "must be \"zero\" or \"oracle\"")
        opts.boundary = sv["boundary"]
    if "seed" in sv:
        opts.seed = integer("solver", "seed", sv["seed"])

    out_dir = raw.get("output", {}).get("dir")
    if out_dir is not None and not isinstance(out_dir, str):
        fail("output", "dir", "expected a string")

    return ProblemFile(version, normals, beta, alpha, a_v, c, opts, out_dir, path)


def _table_line(loc: _Locator, table: str):
    for i, line in enumerate(loc.lines, 1):
        if re.match(rf"^\s*\[\s*{re.escape(table)}\s*\]", line):
            return i, line.index("[") + 1
    return None, None


def parse_file(path) -> ProblemFile:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path} is not UTF-8: {exc.reason}") from None
    return parse_text(text, str(path))
