"""Convex functions on [0, 1] used by the functional and trace checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import xlogy


@dataclass(frozen=True)
class ConvexFunction:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    derivative_sup: float  # sup |f'| on [0, 1]; inf when unbounded
    c1: bool = True

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))

    def __reduce__(self):
        # built-in functions travel to worker processes by name
        try:
            by_name(self.name)
        except (KeyError, ValueError):
            return object.__reduce__(self)
        return (by_name, (self.name,))


def power(q: float) -> ConvexFunction:
    if q < 1:
        raise ValueError("x^q is convex on [0, 1] only for q >= 1")
    return ConvexFunction(f"x^{q:g}", lambda x: np.power(np.clip(x, 0.0, None), q), float(q))


IDENTITY = ConvexFunction("x", lambda x: np.asarray(x, dtype=float), 1.0)
SQUARE = ConvexFunction("x^2", lambda x: np.square(x), 2.0)
CUBE = ConvexFunction("x^3", lambda x: np.power(x, 3), 3.0)
XLOGX = ConvexFunction("x ln x", lambda x: xlogy(np.clip(x, 0.0, None), np.clip(x, 0.0, None)), np.inf, c1=False)

MAJORIZATION_FAMILY = (SQUARE, CUBE, XLOGX)

_BY_NAME = {
    "identity": IDENTITY,
    "x": IDENTITY,
    "square": SQUARE,
    "x^2": SQUARE,
    "cube": CUBE,
    "x^3": CUBE,
    "xlogx": XLOGX,
    "x ln x": XLOGX,
}


def by_name(name: str) -> ConvexFunction:
    try:
        return _BY_NAME[name.lower()]
    except KeyError:
        low = name.lower()
        if low.startswith("power:"):
            return power(float(low.split(":", 1)[1]))
        if low.startswith("x^"):
            return power(float(low[2:]))
        raise KeyError(f"unknown convex function {name!r}; known: {sorted(_BY_NAME)}") from None


def as_function(f) -> ConvexFunction:
    if isinstance(f, ConvexFunction):
        return f
    if isinstance(f, str):
        return by_name(f)
    return ConvexFunction(getattr(f, "__name__", "f"), f, np.inf, c1=False)


def trace_function(matrix: np.ndarray, f) -> float:
    """Tr f(A) for a Hermitian matrix A, eigenvalues clipped into [0, 1]."""
    f = as_function(f)
    lam = np.linalg.eigvalsh(0.5 * (matrix + matrix.conj().T))
    return float(np.sum(f(np.clip(lam, 0.0, 1.0))))
