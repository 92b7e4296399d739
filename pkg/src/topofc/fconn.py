"""Pearson functional connectivity between node feature rows."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericError

# rows at least this long are accumulated in extended precision
LONG_ROW = 1024


def pearson(x, y) -> float:
    """Centered-cosine Pearson correlation, 0 when either row is constant."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size or x.size < 2:
        raise DimensionError(f"pearson needs equal lengths >= 2, got {x.size} and {y.size}")
    d = x.size
    xc = x - math.fsum(x) / d
    yc = y - math.fsum(y) / d
    sxx = math.fsum(xc * xc)
    syy = math.fsum(yc * yc)
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    prod = sxx * syy
    denom = math.sqrt(prod) if 0.0 < prod < math.inf else math.sqrt(sxx) * math.sqrt(syy)
    r = math.fsum(xc * yc) / denom
    return min(1.0, max(-1.0, r))


@dataclass(frozen=True, eq=False)
class FcMatrix:
    """Symmetric correlation matrix. The diagonal holds NaN as an
    "excluded" sentinel and is never read by downstream code."""

    n: int
    values: np.ndarray
    zero_variance_rows: frozenset

    def upper(self):
        """``(i, j, r)`` arrays over the strict upper triangle, row-major."""
        i, j = np.triu_indices(self.n, k=1)
        return i, j, self.values[i, j]


def functional_connectivity(X) -> FcMatrix:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise DimensionError("feature matrix must be 2-D with at least one row")
    n, d = X.shape
    if d < 2:
        raise DimensionError(f"feature dimension d={d} < 2")
    bad = np.argwhere(~np.isfinite(X))
    if bad.size:
        r, c = bad[0]
        raise NumericError(f"non-finite feature at (row {r}, col {c})")

    if d >= LONG_ROW:
        Xe = X.astype(np.longdouble)
        centered = Xe - Xe.mean(axis=1, keepdims=True)
        # corrected two-pass: remove the residual mean left by rounding
        centered -= centered.mean(axis=1, keepdims=True)
        norms = np.sqrt(np.einsum("ij,ij->i", centered, centered))
    else:
        centered = X - X.mean(axis=1, keepdims=True)
        norms = np.sqrt(np.einsum("ij,ij->i", centered, centered))
    zero = norms == 0
    safe = np.where(zero, 1, norms)
    unit = centered / safe[:, None]
    unit[zero] = 0
    if d >= LONG_ROW:
        R = np.einsum("ik,jk->ij", unit, unit).astype(np.float64)
    else:
        R = unit @ unit.T
    R = np.clip(np.triu(R, k=1), -1.0, 1.0)
    R = R + R.T
    np.fill_diagonal(R, np.nan)
    R.flags.writeable = False
    return FcMatrix(n=n, values=R, zero_variance_rows=frozenset(int(k) for k in np.flatnonzero(zero)))


def write_fc_csv(fc: FcMatrix, fh) -> None:
    fh.write("i,j,r\n")
    i, j, r = fc.upper()
    for a, b, v in zip(i.tolist(), j.tolist(), r.tolist()):
        fh.write(f"{a},{b},{v:.17g}\n")
