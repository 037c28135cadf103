"""Built-in forcings and nonlinearities addressable by id from the CLI.

Custom functions enter through the library API; the CLI deliberately has no
expression parser.
"""

from __future__ import annotations

import math

import numpy as np


def forcing(ident: str):
    """Resolve a forcing id: const:<v>, zero, cos, sin, cos_minus_sin."""
    if ident.startswith("const:"):
        value = float(ident.split(":", 1)[1])
        return lambda t: np.full(np.shape(t), value) if np.ndim(t) else value
    table = {
        "zero": lambda t: np.zeros(np.shape(t)) if np.ndim(t) else 0.0,
        "cos": np.cos,
        "sin": np.sin,
        "cos_minus_sin": lambda t: np.cos(t) - np.sin(t),
    }
    if ident not in table:
        raise KeyError(f"unknown forcing id {ident!r}")
    return table[ident]


def product_nonlinearity(t, y, x):
    """f(t, y, x) = x*y; its periodic system has a spurious solution family."""
    return x * y


def hyperbolic_lag(lam: float):
    """f(t, y) = lam*sinh(t - y), the lower/upper-solution showcase problem."""

    def f(t, y):
        return lam * np.sinh(t - y)

    return f


def squared_cosine_growth(t, x, y):
    """f(t, x, y) = t^2 x^2 (cos^2(y^2) + 1): superlinear, nonnegative."""
    return t**2 * x**2 * (np.cos(y**2) ** 2 + 1.0)


def lipschitz_bound_hyperbolic(T: float) -> float:
    """Largest lam for which the hyperbolic_lag problem meets the one-sided
    Lipschitz condition with m = pi/(4T): pi / (4 T cosh(2T))."""
    return math.pi / (4.0 * T * math.cosh(2.0 * T))


NONLINEARITIES = {
    "e-ex": product_nonlinearity,
    "exa2": squared_cosine_growth,
}
