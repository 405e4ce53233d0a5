"""Cost-weighted adversary matrices, minimax witnesses, and composition.

The primal side assigns a symmetric nonnegative weight matrix to the pairs of
inputs with different outputs; its value against costs ``alpha`` is

    min_i  alpha_i * ||G|| / ||G o D_i||,

with ``o`` the entrywise product and ``D_i`` the mask of pairs differing at
bit i.  The dual side assigns each input a probability distribution over bit
positions; its value is the worst pair's

    1 / sum_{i: x_i != y_i} sqrt(p_x(i) p_y(i)) / alpha_i.

Every feasible primal value lower-bounds every feasible dual value, and the
two sides meet, so matching certificate pairs pin the bound down.

Composition lifts certificates from an outer function and per-block inner
functions to the composed function: weight matrices multiply entrywise
through the blocks, eigenvectors multiply through the block outputs, and
witness distributions multiply block by block.  The composed quantities obey
exact product laws, which the checks in this module verify numerically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .boolfn import BooleanFunction, CompositionSpec, compose_functions, split_input
from .specmat import (
    SpectralResult,
    SymMatrix,
    difference_mask,
    hadamard,
    principal_eigenvector,
    spectral_norm,
)

#: Probability rows must sum to one within this tolerance.
PROB_SUM_TOL = 1e-12

#: Composed-identity checks ask for this relative agreement.
COMPOSE_TOL = 1e-8

#: Each output class of a principal eigenvector carries half the mass.
HALF_MASS_TOL = 1e-8


@dataclass(frozen=True)
class CostVector:
    """Positive per-bit query costs."""

    costs: tuple[float, ...]
    unit: str = "queries"

    def __post_init__(self):
        if not self.costs:
            raise ValueError("cost vector must be nonempty")
        for c in self.costs:
            if not (math.isfinite(c) and c > 0):
                raise ValueError(f"costs must be positive and finite, got {c!r}")

    def __len__(self) -> int:
        return len(self.costs)

    def as_array(self) -> np.ndarray:
        return np.array(self.costs, dtype=float)

    def scaled(self, a: float) -> "CostVector":
        return CostVector(tuple(a * c for c in self.costs), self.unit)

    def block(self, start: int, length: int) -> "CostVector":
        """Costs for the block starting at 1-based position ``start``."""
        return CostVector(self.costs[start - 1 : start - 1 + length], self.unit)

    @classmethod
    def ones(cls, n: int) -> "CostVector":
        return cls((1.0,) * n)


def as_costs(alpha, n: int) -> CostVector:
    if not isinstance(alpha, CostVector):
        alpha = CostVector(tuple(float(a) for a in alpha))
    if len(alpha) != n:
        raise ValueError(f"expected {n} costs, got {len(alpha)}")
    return alpha


@dataclass(frozen=True, eq=False)
class AdversaryMatrix:
    """A symmetric weight matrix over the domain of a Boolean function.

    Construction only ties the labels to the domain; use :func:`validate`
    for the sign and zero-pattern requirements, which deserialized or
    hand-built matrices may break.
    """

    function: BooleanFunction
    matrix: SymMatrix

    def __post_init__(self):
        if self.matrix.labels != self.function.domain:
            raise ValueError("matrix labels must equal the function domain, in order")


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...]
    constant_function: bool
    zero_matrix: bool


def validate(gamma: AdversaryMatrix) -> ValidationReport:
    """Check symmetry, nonnegativity, and the same-output zero pattern."""
    f = gamma.function
    a = gamma.matrix.entries
    violations = []
    if not np.array_equal(a, a.T):
        violations.append("matrix is not symmetric")
    for r, c in zip(*np.where(a < 0)):
        violations.append(f"negative entry at ({f.domain[r]}, {f.domain[c]})")
    vals = np.array(f.values)
    same = vals[:, None] == vals[None, :]
    for r, c in zip(*np.where(same & (a != 0))):
        if r <= c:
            violations.append(
                f"nonzero entry at ({f.domain[r]}, {f.domain[c]}) but both outputs are {f.values[r]}"
            )
    zero = not np.any(a)
    if zero and not f.is_constant:
        violations.append("matrix is all zeros but the function is not constant")
    return ValidationReport(not violations, tuple(violations), f.is_constant, zero)


def require_valid(gamma: AdversaryMatrix, allow_zero: bool = False) -> None:
    report = validate(gamma)
    if report.ok or (allow_zero and report.zero_matrix):
        return
    raise ValueError("invalid adversary matrix: " + "; ".join(report.violations))


def zero_gamma(f: BooleanFunction) -> AdversaryMatrix:
    d = len(f.domain)
    return AdversaryMatrix(f, SymMatrix(f.domain, np.zeros((d, d))))


def adv_value(gamma: AdversaryMatrix, alpha) -> float:
    """min_i alpha_i ||G|| / ||G o D_i||; masked-out bits contribute +inf.

    The all-zero matrix has value 0 (the only choice for constants).
    """
    f = gamma.function
    alpha = as_costs(alpha, f.arity)
    require_valid(gamma, allow_zero=True)
    if not np.any(gamma.matrix.entries):
        return 0.0
    whole = spectral_norm(gamma.matrix).norm
    best = math.inf
    for i in range(1, f.arity + 1):
        masked = spectral_norm(hadamard(gamma.matrix, difference_mask(f.domain, i))).norm
        if masked == 0.0:
            continue
        best = min(best, alpha.costs[i - 1] * whole / masked)
    return best


# --------------------------------------------------------------------------
# Minimax witnesses


@dataclass(frozen=True, eq=False)
class MinimaxWitness:
    """One probability distribution over bit positions per domain row."""

    function: BooleanFunction
    p: dict[str, tuple[float, ...]]

    def __post_init__(self):
        f = self.function
        if set(self.p) != set(f.domain):
            raise ValueError("witness rows must cover the domain exactly")
        for x, row in self.p.items():
            if len(row) != f.arity:
                raise ValueError(f"row {x!r} has {len(row)} entries, expected {f.arity}")
            if any(q < 0 for q in row):
                raise ValueError(f"row {x!r} has a negative probability")
            if abs(sum(row) - 1.0) > PROB_SUM_TOL:
                raise ValueError(f"row {x!r} sums to {sum(row)!r}, not 1")

    def matrix_rows(self) -> np.ndarray:
        return np.array([self.p[x] for x in self.function.domain], dtype=float)


def uniform_witness(f: BooleanFunction) -> MinimaxWitness:
    row = tuple(1.0 / f.arity for _ in range(f.arity))
    return MinimaxWitness(f, {x: row for x in f.domain})


def _pair_indices(f: BooleanFunction) -> tuple[np.ndarray, np.ndarray]:
    vals = np.array(f.values)
    xs, ys = np.where(vals[:, None] < vals[None, :])
    return xs, ys


def mm_value(witness: MinimaxWitness, alpha) -> float:
    """Worst pair value of the witness; a pair with zero overlap gives +inf."""
    f = witness.function
    alpha = as_costs(alpha, f.arity)
    xs, ys = _pair_indices(f)
    if xs.size == 0:
        return 0.0
    rows = witness.matrix_rows()
    bits = np.array([[c == "1" for c in x] for x in f.domain])
    a = alpha.as_array()
    best = 0.0
    for lo in range(0, xs.size, 65536):
        sl = slice(lo, lo + 65536)
        diff = bits[xs[sl]] != bits[ys[sl]]
        s = (np.sqrt(rows[xs[sl]] * rows[ys[sl]]) / a * diff).sum(axis=1)
        with np.errstate(divide="ignore"):
            vals = np.where(s > 0, 1.0 / np.where(s > 0, s, 1.0), math.inf)
        best = max(best, float(vals.max()))
    return best


# --------------------------------------------------------------------------
# Composition


def _block_indexers(spec: CompositionSpec, h: BooleanFunction):
    """Index arrays mapping each composed row to outer/inner rows."""
    tf = np.empty(len(h.domain), dtype=int)
    per_block = [np.empty(len(h.domain), dtype=int) for _ in spec.inner]
    tilde_bits = np.empty((len(h.domain), len(spec.inner)), dtype=int)
    for r, x in enumerate(h.domain):
        blocks, tilde = split_input(x, spec)
        tf[r] = spec.outer.index(tilde)
        for i, (g, b) in enumerate(zip(spec.inner, blocks)):
            per_block[i][r] = g.index(b)
        tilde_bits[r] = [int(c) for c in tilde]
    return tf, per_block, tilde_bits


def compose_gamma(
    gamma_f: AdversaryMatrix,
    gammas_g: Sequence[AdversaryMatrix],
    spec: CompositionSpec,
) -> AdversaryMatrix:
    """Composed weight matrix with ||G_h|| = ||G_f|| * prod_i ||G_{g_i}||.

    Entrywise, G_h[x, y] = G_f[xt, yt] * prod_i F_i[x^i, y^i] where
    F_i = G_{g_i} + ||G_{g_i}|| * I: on a block whose outputs agree only the
    diagonal term survives, and there the outer factor supplies the zero, so
    this single formula covers both the same-output and crossing blocks.
    """
    if gamma_f.function != spec.outer:
        raise ValueError("gamma_f is not over the outer function")
    if len(gammas_g) != len(spec.inner):
        raise ValueError(f"expected {len(spec.inner)} inner matrices")
    for g, gam in zip(spec.inner, gammas_g):
        if gam.function != g:
            raise ValueError("inner matrix order must match the composition blocks")
    require_valid(gamma_f, allow_zero=True)
    for gam in gammas_g:
        require_valid(gam, allow_zero=True)
    h = compose_functions(spec)
    tf, per_block, _ = _block_indexers(spec, h)
    out = gamma_f.matrix.entries[np.ix_(tf, tf)].copy()
    for i, gam in enumerate(gammas_g):
        norm = spectral_norm(gam.matrix).norm
        factor = gam.matrix.entries + norm * np.eye(gam.matrix.dim)
        out *= factor[np.ix_(per_block[i], per_block[i])]
    return AdversaryMatrix(h, SymMatrix(h.domain, out))


@dataclass(frozen=True, eq=False)
class EigvecParts:
    """A unit eigenvector split by the function's output classes."""

    function: BooleanFunction
    whole: np.ndarray
    half0: np.ndarray
    half1: np.ndarray

    @classmethod
    def from_vector(cls, function: BooleanFunction, vector: np.ndarray) -> "EigvecParts":
        v = np.asarray(vector, dtype=float)
        if v.shape != (len(function.domain),):
            raise ValueError("vector length must match the domain")
        vals = np.array(function.values)
        return cls(function, v, np.where(vals == 0, v, 0.0), np.where(vals == 1, v, 0.0))


def _check_half_mass(parts: EigvecParts) -> None:
    if not np.array_equal(parts.whole, parts.half0 + parts.half1):
        raise ValueError("eigenvector halves do not add up to the whole")
    for b, half in ((0, parts.half0), (1, parts.half1)):
        mass = float(half @ half)
        if abs(mass - 0.5) > HALF_MASS_TOL:
            raise ValueError(
                f"output class {b} carries squared mass {mass!r}, expected 1/2"
            )


def compose_eigenvector(
    delta_f: SpectralResult,
    deltas_g: Sequence[EigvecParts],
    spec: CompositionSpec,
) -> np.ndarray:
    """Principal eigenvector of the composed matrix, built by products.

    Entry by entry, delta_h[x] = delta_f[xt] * prod_i delta_{g_i}[x^i] taken
    from the half matching the block's output.  Each inner eigenvector must
    put squared mass 1/2 on each output class; the result then has squared
    norm 1/2**k.
    """
    if len(deltas_g) != len(spec.inner):
        raise ValueError(f"expected {len(spec.inner)} inner eigenvectors")
    for parts, g in zip(deltas_g, spec.inner):
        if parts.function != g:
            raise ValueError("inner eigenvector order must match the composition blocks")
        _check_half_mass(parts)
    h = compose_functions(spec)
    tf, per_block, tilde_bits = _block_indexers(spec, h)
    out = delta_f.vector[tf].copy()
    for i, parts in enumerate(deltas_g):
        chosen = np.where(
            tilde_bits[:, i] == 0, parts.half0[per_block[i]], parts.half1[per_block[i]]
        )
        out *= chosen
    return out


def _rel_close(a: float, b: float, tol: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    scale = max(abs(a), abs(b))
    return abs(a - b) <= tol * scale if scale > 0 else True


def _ratio(num: float, den: float) -> float:
    return math.inf if den == 0.0 else num / den


@dataclass(frozen=True, eq=False)
class MaskedCompositionReport:
    """Both sides of the masked-composition identities at one position.

    ``ell`` is a position of the composed input, landing at position
    ``inner_pos`` of block ``block``.  The identities: the masked composed
    matrix factors entrywise through the blocks, its norm is the product of
    the factor norms, and the whole/masked norm ratio splits into the outer
    ratio times the inner ratio.
    """

    ell: int
    block: int
    inner_pos: int
    lhs_matrix: SymMatrix
    rhs_matrix: SymMatrix
    entrywise_ok: bool
    norm_lhs: float
    norm_rhs: float
    norm_ok: bool
    ratio_lhs: float
    ratio_rhs: float
    ratio_ok: bool

    @property
    def ok(self) -> bool:
        return self.entrywise_ok and self.norm_ok and self.ratio_ok


def masked_compose_check(
    gamma_f: AdversaryMatrix,
    gammas_g: Sequence[AdversaryMatrix],
    spec: CompositionSpec,
    ell: int,
    tol: float = COMPOSE_TOL,
) -> MaskedCompositionReport:
    """Verify the masked factorization of the composed matrix at position ell."""
    p, q = spec.block_of(ell)
    gamma_h = compose_gamma(gamma_f, gammas_g, spec)
    h = gamma_h.function
    lhs = hadamard(gamma_h.matrix, difference_mask(h.domain, ell))

    tf, per_block, _ = _block_indexers(spec, h)
    masked_f = hadamard(gamma_f.matrix, difference_mask(spec.outer.domain, p))
    masked_p = hadamard(gammas_g[p - 1].matrix, difference_mask(spec.inner[p - 1].domain, q))
    rhs = masked_f.entries[np.ix_(tf, tf)].copy()
    factor_p = masked_p.entries + spectral_norm(masked_p).norm * np.eye(masked_p.dim)
    rhs *= factor_p[np.ix_(per_block[p - 1], per_block[p - 1])]
    inner_norms = []
    for i, gam in enumerate(gammas_g):
        if i == p - 1:
            continue
        norm = spectral_norm(gam.matrix).norm
        inner_norms.append(norm)
        factor = gam.matrix.entries + norm * np.eye(gam.matrix.dim)
        rhs *= factor[np.ix_(per_block[i], per_block[i])]
    rhs_matrix = SymMatrix(h.domain, rhs)

    if lhs.dim:
        scale = max(float(np.abs(lhs.entries).max()), float(np.abs(rhs).max()))
        diff = float(np.abs(lhs.entries - rhs).max())
    else:
        scale = diff = 0.0
    entrywise_ok = diff <= tol * scale if scale > 0 else True

    norm_lhs = spectral_norm(lhs).norm
    norm_rhs = spectral_norm(masked_f).norm * spectral_norm(masked_p).norm
    for norm in inner_norms:
        norm_rhs *= norm
    norm_ok = _rel_close(norm_lhs, norm_rhs, tol)

    ratio_lhs = _ratio(spectral_norm(gamma_h.matrix).norm, norm_lhs)
    ratio_rhs = _ratio(spectral_norm(gamma_f.matrix).norm, spectral_norm(masked_f).norm) * _ratio(
        spectral_norm(gammas_g[p - 1].matrix).norm, spectral_norm(masked_p).norm
    )
    ratio_ok = _rel_close(ratio_lhs, ratio_rhs, tol)

    return MaskedCompositionReport(
        ell=ell,
        block=p,
        inner_pos=q,
        lhs_matrix=lhs,
        rhs_matrix=rhs_matrix,
        entrywise_ok=entrywise_ok,
        norm_lhs=norm_lhs,
        norm_rhs=norm_rhs,
        norm_ok=norm_ok,
        ratio_lhs=ratio_lhs,
        ratio_rhs=ratio_rhs,
        ratio_ok=ratio_ok,
    )


def compose_minimax(
    p_f: MinimaxWitness,
    ps_g: Sequence[MinimaxWitness],
    spec: CompositionSpec,
) -> MinimaxWitness:
    """Composed witness: block i gets outer mass p_f(i) spread by the inner row.

    Each composed row is a product of distributions, so it sums to one
    without renormalization.
    """
    if p_f.function != spec.outer:
        raise ValueError("p_f is not over the outer function")
    if len(ps_g) != len(spec.inner):
        raise ValueError(f"expected {len(spec.inner)} inner witnesses")
    for w, g in zip(ps_g, spec.inner):
        if w.function != g:
            raise ValueError("inner witness order must match the composition blocks")
    h = compose_functions(spec)
    rows: dict[str, tuple[float, ...]] = {}
    for x in h.domain:
        blocks, tilde = split_input(x, spec)
        outer_row = p_f.p[tilde]
        row: list[float] = []
        for i, (w, b) in enumerate(zip(ps_g, blocks)):
            weight = outer_row[i]
            row.extend(weight * q for q in w.p[b])
        rows[x] = tuple(row)
    return MinimaxWitness(h, rows)


# --------------------------------------------------------------------------
# JSON forms


def gamma_to_dict(gamma: AdversaryMatrix) -> dict:
    from .boolfn import function_to_dict
    from .specmat import matrix_to_dict

    out = matrix_to_dict(gamma.matrix)
    out["function"] = function_to_dict(gamma.function)
    return out


def gamma_from_dict(data: Mapping, function: BooleanFunction | None = None) -> AdversaryMatrix:
    from .boolfn import function_from_dict
    from .specmat import matrix_from_dict

    if function is None:
        if "function" not in data:
            raise ValueError("matrix JSON has no embedded function and none was given")
        function = function_from_dict(data["function"])
    return AdversaryMatrix(function, matrix_from_dict(data))


def witness_to_dict(witness: MinimaxWitness) -> dict:
    return {
        "rows": [
            {"x": x, "p": list(witness.p[x])} for x in witness.function.domain
        ]
    }


def witness_from_dict(data: Mapping, function: BooleanFunction) -> MinimaxWitness:
    try:
        rows = {str(r["x"]): tuple(float(q) for q in r["p"]) for r in data["rows"]}
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed witness: {exc}") from None
    return MinimaxWitness(function, rows)
