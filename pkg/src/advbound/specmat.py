"""Dense symmetric matrices indexed by bit-string labels, and their spectra.

Everything downstream works at desk scale (at most a few thousand rows), so
matrices are dense float64 and eigenproblems go through LAPACK.  The spectral
results carry an explicit residual so callers can audit accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

#: Accept an eigenpair only if ||A v - lambda v|| <= RESIDUAL_TOL * max(1, |lambda|).
RESIDUAL_TOL = 1e-9


class EigensolverError(ArithmeticError):
    """Eigensolve did not meet the residual contract; carries the residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """An exactly symmetric real matrix with distinct equal-length labels."""

    labels: tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        d = len(self.labels)
        if a.shape != (d, d):
            raise ValueError(f"entries shape {a.shape} does not match {d} labels")
        if len(set(self.labels)) != d:
            raise ValueError("labels must be distinct")
        if d and len({len(s) for s in self.labels}) != 1:
            raise ValueError("labels must have equal length")
        if not np.array_equal(a, a.T):
            raise ValueError("entries must be exactly symmetric")
        if not np.all(np.isfinite(a)):
            raise ValueError("entries must be finite")
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)


@dataclass(frozen=True, eq=False)
class SpectralResult:
    """Dominant eigenpair: ``norm`` is |lambda|, ``vector`` is unit length."""

    norm: float
    vector: np.ndarray
    residual: float


def hadamard(a: SymMatrix, b: SymMatrix) -> SymMatrix:
    """Entrywise product; labels must agree exactly."""
    if a.labels != b.labels:
        raise ValueError("hadamard requires identical labels")
    return SymMatrix(a.labels, a.entries * b.entries)


def difference_mask(labels: Sequence[str], i: int) -> SymMatrix:
    """0/1 matrix with 1 where the labels differ at position i (1-based)."""
    labels = tuple(labels)
    if labels and not 1 <= i <= len(labels[0]):
        raise ValueError(f"position {i} out of range 1..{len(labels[0])}")
    chars = np.array([list(s) for s in labels]) if labels else np.empty((0, 0), dtype=str)
    col = chars[:, i - 1] if labels else np.empty(0, dtype=str)
    return SymMatrix(labels, (col[:, None] != col[None, :]).astype(float))


def _oriented(v: np.ndarray) -> np.ndarray:
    # Largest-magnitude entry positive; ties break to the lowest index.
    j = int(np.argmax(np.abs(v)))
    return -v if v[j] < 0 else v


def _checked(a: np.ndarray, lam: float, v: np.ndarray, tol: float) -> SpectralResult:
    residual = float(np.linalg.norm(a @ v - lam * v))
    if residual > tol * max(1.0, abs(lam)):
        raise EigensolverError(
            f"eigensolver residual {residual:.3e} exceeds {tol:.1e} * max(1, |lambda|)",
            residual,
        )
    return SpectralResult(abs(float(lam)), _oriented(v), residual)


def spectral_norm(a: SymMatrix, tol: float = RESIDUAL_TOL) -> SpectralResult:
    """Largest-magnitude eigenvalue and its eigenvector.

    On a magnitude tie the algebraically largest eigenvalue wins, so for
    entrywise-nonnegative matrices the vector is the dominant one.
    """
    if a.dim == 0:
        return SpectralResult(0.0, np.zeros(0), 0.0)
    w, vecs = np.linalg.eigh(a.entries)
    if abs(w[-1]) >= abs(w[0]):
        lam, v = w[-1], vecs[:, -1]
    else:
        lam, v = w[0], vecs[:, 0]
    return _checked(a.entries, float(lam), v, tol)


def principal_eigenvector(a: SymMatrix, tol: float = RESIDUAL_TOL) -> SpectralResult:
    """Eigenpair of the largest eigenvalue of an entrywise-nonnegative matrix."""
    if np.any(a.entries < 0):
        raise ValueError("principal_eigenvector requires nonnegative entries")
    if a.dim == 0:
        return SpectralResult(0.0, np.zeros(0), 0.0)
    w, vecs = np.linalg.eigh(a.entries)
    return _checked(a.entries, float(w[-1]), vecs[:, -1], tol)


# --------------------------------------------------------------------------
# Matrix JSON:  {"labels": [...], "entries": [[...], ...]}


def matrix_to_dict(a: SymMatrix) -> dict:
    return {"labels": list(a.labels), "entries": a.entries.tolist()}


def matrix_from_dict(data: Mapping) -> SymMatrix:
    try:
        labels = tuple(str(s) for s in data["labels"])
        entries = np.array(data["entries"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix: {exc}") from None
    # SymMatrix checks symmetry exactly; serialized input gets no slack.
    return SymMatrix(labels, entries)
