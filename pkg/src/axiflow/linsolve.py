"""Banded direct solves with low-rank corrections.

The Newton matrices are block-banded with nearest-neighbour coupling.  Closed
curves add two corner blocks and conserved mean curvature flow adds one dense
rank-one term; both are carried as a low-rank update ``U @ V.T`` on top of the
band and removed with the Sherman-Morrison-Woodbury identity.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, lu_factor, lu_solve, solve_banded


class SingularSystem(ArithmeticError):
    """The linear system is singular to working precision."""


@dataclass
class BandedMatrix:
    """Square matrix ``band + U @ V.T``.

    ``ab`` uses the LAPACK layout ``ab[upper + i - j, j] == a[i, j]``.
    """

    ab: np.ndarray
    lower: int
    upper: int
    U: np.ndarray | None = None
    V: np.ndarray | None = None
    _corner: list = field(default_factory=list, repr=False)

    @classmethod
    def zeros(cls, n: int, lower: int, upper: int) -> "BandedMatrix":
        return cls(np.zeros((lower + upper + 1, n)), lower, upper)

    @classmethod
    def from_dense(cls, a: np.ndarray, lower: int, upper: int) -> "BandedMatrix":
        n = a.shape[0]
        m = cls.zeros(n, lower, upper)
        for i in range(n):
            for j in range(max(0, i - lower), min(n, i + upper + 1)):
                m.ab[upper + i - j, j] = a[i, j]
        i, j = np.indices(a.shape)
        if np.any(a[(i - j > lower) | (j - i > upper)]):
            raise ValueError("matrix has entries outside the declared band")
        return m

    @property
    def n(self) -> int:
        return self.ab.shape[1]

    def add(self, rows, cols, values) -> None:
        """Accumulate entries; anything outside the band goes to the low-rank part."""
        rows = np.asarray(rows).ravel()
        cols = np.asarray(cols).ravel()
        values = np.asarray(values, dtype=float).ravel()
        offset = rows - cols
        inside = (offset <= self.lower) & (offset >= -self.upper)
        np.add.at(self.ab, (self.upper + offset[inside], cols[inside]), values[inside])
        if not np.all(inside):
            self._corner.append((rows[~inside], cols[~inside], values[~inside]))

    def add_low_rank(self, u: np.ndarray, v: np.ndarray) -> None:
        u = np.asarray(u, dtype=float).reshape(self.n, -1)
        v = np.asarray(v, dtype=float).reshape(self.n, -1)
        self.U = u if self.U is None else np.hstack([self.U, u])
        self.V = v if self.V is None else np.hstack([self.V, v])

    def _flush_corners(self) -> None:
        if not self._corner:
            return
        rows = np.concatenate([c[0] for c in self._corner])
        cols = np.concatenate([c[1] for c in self._corner])
        vals = np.concatenate([c[2] for c in self._corner])
        self._corner = []
        # one unit column per distinct corner row; V holds that row's entries
        distinct = np.unique(rows)
        u = np.zeros((self.n, distinct.size))
        v = np.zeros((self.n, distinct.size))
        k = np.searchsorted(distinct, rows)
        u[distinct, np.arange(distinct.size)] = 1.0
        np.add.at(v, (cols, k), vals)
        self.add_low_rank(u, v)

    def set_identity_row(self, i: int) -> None:
        """Replace row and column ``i`` by the unit vector (eliminated unknown)."""
        self._flush_corners()
        for d in range(-self.upper, self.lower + 1):
            j = i - d
            if 0 <= j < self.n:
                self.ab[self.upper + d, j] = 0.0
        self.ab[:, i] = 0.0
        self.ab[self.upper, i] = 1.0
        if self.U is not None:
            self.U[i, :] = 0.0
            self.V[i, :] = 0.0

    def to_dense(self, band_only: bool = False) -> np.ndarray:
        self._flush_corners()
        n = self.n
        a = np.zeros((n, n))
        for d in range(-self.upper, self.lower + 1):
            diag = self.ab[self.upper + d]
            j = np.arange(max(0, -d), min(n, n - d))
            a[j + d, j] = diag[j]
        if not band_only and self.U is not None:
            a += self.U @ self.V.T
        return a

    def matvec(self, x: np.ndarray) -> np.ndarray:
        self._flush_corners()
        n = self.n
        y = np.zeros(n)
        for d in range(-self.upper, self.lower + 1):
            diag = self.ab[self.upper + d]
            j = np.arange(max(0, -d), min(n, n - d))
            y[j + d] += diag[j] * x[j]
        if self.U is not None:
            y += self.U @ (self.V.T @ x)
        return y


def _band_solve(m: BandedMatrix, rhs: np.ndarray) -> np.ndarray:
    try:
        with np.errstate(all="raise"):
            x = solve_banded((m.lower, m.upper), m.ab, rhs, check_finite=False)
    except (LinAlgError, FloatingPointError) as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystem("non-finite solution of banded system")
    return x


def factor_solve(m: BandedMatrix, b: np.ndarray) -> np.ndarray:
    """Solve ``(band + U V^T) x = b``.

    The low-rank part is handled by Woodbury: with ``Z = B^{-1} U`` and
    ``y = B^{-1} b``, ``x = y - Z (I + V^T Z)^{-1} V^T y``.
    """
    m._flush_corners()
    b = np.asarray(b, dtype=float)
    if m.U is None:
        return _band_solve(m, b)
    k = m.U.shape[1]
    sol = _band_solve(m, np.column_stack([b, m.U]))
    y, Z = sol[:, 0], sol[:, 1:]
    cap = np.eye(k) + m.V.T @ Z
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)   # singularity is checked below
            lu = lu_factor(cap, check_finite=False)
    except (LinAlgError, ValueError) as exc:
        raise SingularSystem(str(exc)) from exc
    if np.min(np.abs(np.diag(lu[0]))) <= np.finfo(float).eps * np.max(np.abs(cap)):
        raise SingularSystem("singular capacitance matrix in low-rank update")
    return y - Z @ lu_solve(lu, m.V.T @ y, check_finite=False)
