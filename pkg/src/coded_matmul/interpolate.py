"""Exact polynomial interpolation over Z_q or the rationals.

Decoders here solve Vandermonde systems by Gauss-Jordan elimination, which
is cubic in the number of points and fine at desk scale.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from .linalg import DenseMatrix


def _inv(x, modulus: int | None):
    if modulus is None:
        return Fraction(1) / x
    return pow(int(x), -1, modulus)


def _norm(x, modulus: int | None):
    return Fraction(x) if modulus is None else int(x) % modulus


def vandermonde(points: Sequence[int], ncols: int, modulus: int | None = None) -> list[list]:
    return [[_norm(pow(int(x), e), modulus) for e in range(ncols)] for x in points]


def _eliminate(rows: list[list], modulus: int | None, ncols: int) -> tuple[list[list], list[int]]:
    """Reduced row echelon form restricted to the first ``ncols`` columns."""
    M = [[_norm(v, modulus) for v in row] for row in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = _inv(M[r][c], modulus)
        M[r] = [_norm(v * inv, modulus) for v in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [_norm(a - f * p, modulus) for a, p in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    return M, pivots


def rank(rows: Sequence[Sequence], modulus: int | None = None) -> int:
    if not rows:
        return 0
    return len(_eliminate([list(r) for r in rows], modulus, len(rows[0]))[1])


def invert(matrix: Sequence[Sequence], modulus: int | None = None) -> list[list]:
    n = len(matrix)
    aug = [list(row) + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(matrix)]
    M, pivots = _eliminate(aug, modulus, n)
    if len(pivots) < n:
        raise ValueError("matrix is singular")
    return [row[n:] for row in M]


def coefficient_determined(points: Sequence[int], ncoeffs: int, target: int, modulus: int | None = None) -> bool:
    """Whether evaluations at ``points`` pin down coefficient ``target`` of a
    polynomial with ``ncoeffs`` coefficients (e_target lies in the row space)."""
    V = vandermonde(points, ncoeffs, modulus)
    unit = [1 if e == target else 0 for e in range(ncoeffs)]
    return rank(V, modulus) == rank(V + [unit], modulus)


def interpolate_blocks(
    points: Sequence[int], values: Sequence[DenseMatrix], modulus: int | None = None
) -> list[DenseMatrix]:
    """Coefficients ``C_0..C_{t-1}`` with ``sum_e C_e x^e = values[j]`` at ``x = points[j]``."""
    t = len(points)
    if t != len(values):
        raise ValueError("one value per point required")
    if len(set(_norm(x, modulus) for x in points)) != t:
        raise ValueError("evaluation points must be distinct")
    Vinv = invert(vandermonde(points, t, modulus), modulus)
    coeffs = []
    for row in Vinv:
        acc = sum((coef * v.data for coef, v in zip(row, values) if coef != 0), np.zeros(values[0].shape, dtype=object))
        if modulus is None:
            if any(Fraction(x).denominator != 1 for x in acc.ravel()):
                raise ValueError("interpolated coefficients are not integral; inconsistent worker outputs")
            acc = np.vectorize(lambda x: int(Fraction(x)), otypes=[object])(acc)
        coeffs.append(DenseMatrix(acc, modulus))
    return coeffs
