"""Boolean functions on bit strings: truth tables, formulas, composition.

Inputs are strings over ``{'0','1'}``; bit positions are 1-based with
position 1 the leftmost character.  Functions may be partial: the domain is
an explicit ordered tuple of bit strings.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

#: Default cap on total arity; dense downstream kernels stop at 4096 rows.
MAX_ARITY = 12

FAMILY_NAMES = ("AND", "OR", "PARITY", "NAND", "ID")


class FormulaError(ValueError):
    """Formula text rejected; ``position`` is the 1-based character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (position {position})")
        self.position = position


def validate_bits(x: str, n: int | None = None) -> str:
    if not isinstance(x, str) or any(c not in "01" for c in x) or not x:
        raise ValueError(f"not a bit string: {x!r}")
    if n is not None and len(x) != n:
        raise ValueError(f"expected {n} bits, got {len(x)}: {x!r}")
    return x


@dataclass(frozen=True)
class BooleanFunction:
    """A possibly partial map from n-bit strings to {0, 1}.

    ``domain`` is an ordered tuple of distinct n-bit strings and
    ``values[i]`` is the output on ``domain[i]``.
    """

    arity: int
    domain: tuple[str, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be at least 1")
        if len(self.values) != len(self.domain):
            raise ValueError("domain and values must have equal length")
        seen = set()
        for x in self.domain:
            validate_bits(x, self.arity)
            if x in seen:
                raise ValueError(f"duplicate domain entry {x!r}")
            seen.add(x)
        for v in self.values:
            if v not in (0, 1):
                raise ValueError(f"outputs must be 0 or 1, got {v!r}")

    @cached_property
    def _index(self) -> dict[str, int]:
        return {x: i for i, x in enumerate(self.domain)}

    def __call__(self, x: str) -> int:
        try:
            return self.values[self._index[x]]
        except KeyError:
            raise ValueError(f"{x!r} is outside the domain") from None

    def index(self, x: str) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise ValueError(f"{x!r} is outside the domain") from None

    @property
    def is_total(self) -> bool:
        return len(self.domain) == 2**self.arity

    @property
    def is_constant(self) -> bool:
        return len(set(self.values)) <= 1

    def inputs_with_value(self, b: int) -> tuple[str, ...]:
        return tuple(x for x, v in zip(self.domain, self.values) if v == b)

    @classmethod
    def from_table(cls, n: int, table: Mapping[str, int]) -> "BooleanFunction":
        """Build from a mapping; rows are ordered lexicographically."""
        keys = sorted(table)
        return cls(n, tuple(keys), tuple(int(table[k]) for k in keys))

    @classmethod
    def total(cls, n: int, predicate) -> "BooleanFunction":
        dom = tuple("".join(bits) for bits in itertools.product("01", repeat=n))
        return cls(n, dom, tuple(int(bool(predicate(x))) for x in dom))


def make_family(name: str, n: int) -> BooleanFunction:
    """Named total functions: AND, OR, PARITY, NAND on n bits; ID on one bit."""
    if n < 1:
        raise ValueError("arity must be at least 1")
    key = name.strip().upper()
    if key == "AND":
        return BooleanFunction.total(n, lambda x: "0" not in x)
    if key == "OR":
        return BooleanFunction.total(n, lambda x: "1" in x)
    if key == "PARITY":
        return BooleanFunction.total(n, lambda x: x.count("1") % 2 == 1)
    if key == "NAND":
        return BooleanFunction.total(n, lambda x: "0" in x)
    if key == "ID":
        if n != 1:
            raise ValueError("ID is a one-bit function; got n=%d" % n)
        return BooleanFunction.total(1, lambda x: x == "1")
    raise ValueError(f"unknown family {name!r}; choose from {FAMILY_NAMES}")


# --------------------------------------------------------------------------
# Formula ASTs
#
# Grammar:  var := 'x' digits (1-based);  '~' binds tightest, then '&',
# then '|'; parentheses group; same-operator chains associate left.


@dataclass(frozen=True)
class Leaf:
    index: int


@dataclass(frozen=True)
class Not:
    child: "FormulaAst"


@dataclass(frozen=True)
class And:
    left: "FormulaAst"
    right: "FormulaAst"


@dataclass(frozen=True)
class Or:
    left: "FormulaAst"
    right: "FormulaAst"


FormulaAst = Union[Leaf, Not, And, Or]


def _tokenize(text: str) -> list[tuple[str, int, int]]:
    # (kind, value-or-0, position): kinds VAR ~ & | ( )
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "~&|()":
            tokens.append((c, 0, i + 1))
            i += 1
            continue
        if c == "x":
            j = i + 1
            while j < len(text) and text[j].isdigit():
                j += 1
            if j == i + 1:
                raise FormulaError("expected digits after 'x'", i + 1)
            k = int(text[i + 1 : j])
            if k < 1:
                raise FormulaError(f"variable index must be at least 1, got x{k}", i + 1)
            tokens.append(("VAR", k, i + 1))
            i = j
            continue
        raise FormulaError(f"unexpected character {c!r}", i + 1)
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, int, int]], length: int):
        self.tokens = tokens
        self.pos = 0
        self.end = length + 1

    def _peek(self) -> str | None:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def _take(self) -> tuple[str, int, int]:
        if self.pos >= len(self.tokens):
            raise FormulaError("unexpected end of formula", self.end)
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse_or(self) -> FormulaAst:
        node = self.parse_and()
        while self._peek() == "|":
            self._take()
            node = Or(node, self.parse_and())
        return node

    def parse_and(self) -> FormulaAst:
        node = self.parse_unary()
        while self._peek() == "&":
            self._take()
            node = And(node, self.parse_unary())
        return node

    def parse_unary(self) -> FormulaAst:
        if self._peek() == "~":
            self._take()
            return Not(self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> FormulaAst:
        kind, value, pos = self._take()
        if kind == "VAR":
            return Leaf(value)
        if kind == "(":
            node = self.parse_or()
            kind2, _, pos2 = self._take()
            if kind2 != ")":
                raise FormulaError("expected ')'", pos2)
            return node
        raise FormulaError(f"unexpected token {kind!r}", pos)


def parse_formula(text: str) -> FormulaAst:
    """Parse formula text into an AST, with 1-based error positions."""
    parser = _Parser(_tokenize(text), len(text))
    node = parser.parse_or()
    if parser.pos != len(parser.tokens):
        kind, _, pos = parser.tokens[parser.pos]
        raise FormulaError(f"unexpected token {kind!r} after formula", pos)
    return node


def leaf_indices(ast: FormulaAst) -> list[int]:
    """Variable indices at the leaves, left to right (with repeats)."""
    if isinstance(ast, Leaf):
        return [ast.index]
    if isinstance(ast, Not):
        return leaf_indices(ast.child)
    return leaf_indices(ast.left) + leaf_indices(ast.right)


def is_read_once(ast: FormulaAst) -> bool:
    seen = leaf_indices(ast)
    return len(seen) == len(set(seen))


def formula_arity(ast: FormulaAst) -> int:
    return max(leaf_indices(ast))


def eval_formula(ast: FormulaAst, x: str) -> int:
    if isinstance(ast, Leaf):
        if ast.index > len(x):
            raise ValueError(f"leaf x{ast.index} out of range for {len(x)} bits")
        return int(x[ast.index - 1])
    if isinstance(ast, Not):
        return 1 - eval_formula(ast.child, x)
    if isinstance(ast, And):
        return eval_formula(ast.left, x) & eval_formula(ast.right, x)
    return eval_formula(ast.left, x) | eval_formula(ast.right, x)


def formula_to_function(ast: FormulaAst, n: int | None = None) -> BooleanFunction:
    """Total truth table of a formula over n bits (default: highest leaf)."""
    needed = formula_arity(ast)
    if n is None:
        n = needed
    elif n < needed:
        raise ValueError(f"formula uses x{needed} but n={n}")
    if n > MAX_ARITY:
        raise ValueError(f"arity {n} exceeds the cap {MAX_ARITY}")
    return BooleanFunction.total(n, lambda x: eval_formula(ast, x))


def ast_to_dict(ast: FormulaAst) -> dict:
    if isinstance(ast, Leaf):
        return {"op": "var", "index": ast.index}
    if isinstance(ast, Not):
        return {"op": "not", "child": ast_to_dict(ast.child)}
    op = "and" if isinstance(ast, And) else "or"
    return {"op": op, "left": ast_to_dict(ast.left), "right": ast_to_dict(ast.right)}


# --------------------------------------------------------------------------
# Composition on disjoint blocks


@dataclass(frozen=True)
class CompositionSpec:
    """Outer function on k bits fed by k inner functions on disjoint blocks.

    The composed input is the concatenation of the inner blocks, in order;
    ``offsets[i]`` is the 1-based position where block i starts.
    """

    outer: BooleanFunction
    inner: tuple[BooleanFunction, ...]
    offsets: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if len(self.inner) != self.outer.arity:
            raise ValueError(
                f"outer arity {self.outer.arity} but {len(self.inner)} inner functions"
            )
        offs = []
        start = 1
        for g in self.inner:
            offs.append(start)
            start += g.arity
        object.__setattr__(self, "offsets", tuple(offs))

    @property
    def total_arity(self) -> int:
        return sum(g.arity for g in self.inner)

    def block_of(self, ell: int) -> tuple[int, int]:
        """Map a 1-based position of the composed input to (block, position)."""
        if not 1 <= ell <= self.total_arity:
            raise ValueError(f"position {ell} out of range 1..{self.total_arity}")
        for p, (off, g) in enumerate(zip(self.offsets, self.inner), start=1):
            if ell < off + g.arity:
                return p, ell - off + 1
        return len(self.inner), ell - self.offsets[-1] + 1


def split_input(x: str, spec: CompositionSpec) -> tuple[tuple[str, ...], str]:
    """Split x into blocks and evaluate them: returns (blocks, inner outputs)."""
    validate_bits(x, spec.total_arity)
    blocks = []
    tilde = []
    for off, g in zip(spec.offsets, spec.inner):
        piece = x[off - 1 : off - 1 + g.arity]
        blocks.append(piece)
        tilde.append(str(g(piece)))
    return tuple(blocks), "".join(tilde)


def compose_functions(spec: CompositionSpec, max_arity: int = MAX_ARITY) -> BooleanFunction:
    """The composed function h(x) = f(g_1(x^1), ..., g_k(x^k)).

    The domain keeps exactly those concatenations whose blocks lie in the
    inner domains and whose inner outputs lie in the outer domain; rows are
    ordered by the product of the inner domain orders.
    """
    n = spec.total_arity
    if n > max_arity:
        raise ValueError(f"composed arity {n} exceeds the cap {max_arity}")
    dom = []
    vals = []
    for blocks in itertools.product(*(g.domain for g in spec.inner)):
        tilde = "".join(str(g(b)) for g, b in zip(spec.inner, blocks))
        if tilde in spec.outer._index:
            dom.append("".join(blocks))
            vals.append(spec.outer(tilde))
    return BooleanFunction(n, tuple(dom), tuple(vals))


def iterate_function(f: BooleanFunction, d: int, max_arity: int = MAX_ARITY) -> BooleanFunction:
    """d-fold self-composition f(f(...), ..., f(...)) on n**d bits."""
    if d < 1:
        raise ValueError("depth must be at least 1")
    if not f.is_total:
        raise ValueError("iteration requires a total function")
    if f.arity**d > max_arity:
        raise ValueError(f"iterated arity {f.arity**d} exceeds the cap {max_arity}")
    g = f
    for _ in range(d - 1):
        g = compose_functions(CompositionSpec(f, (g,) * f.arity), max_arity)
    return g


# --------------------------------------------------------------------------
# Truth-table JSON:  {"n": int, "rows": [{"x": "0101", "f": 0|1}, ...]}


def function_to_dict(f: BooleanFunction) -> dict:
    return {"n": f.arity, "rows": [{"x": x, "f": v} for x, v in zip(f.domain, f.values)]}


def function_from_dict(data: Mapping) -> BooleanFunction:
    try:
        n = int(data["n"])
        rows = data["rows"]
        dom = tuple(str(r["x"]) for r in rows)
        vals = tuple(int(r["f"]) for r in rows)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed truth table: {exc}") from None
    return BooleanFunction(n, dom, vals)
