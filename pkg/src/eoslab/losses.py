"""Scalar loss interface for the regression objective.

Only the quadratic loss l(a) = a^2 / 4 ships; the interface carries first and
second derivatives so the Hessian assembly stays generic in l.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadraticLoss:
    """l(a) = a^2 / 4, so that 2 l'(a) = a and 2 l''(a) = 1."""

    def value(self, a):
        return np.asarray(a) ** 2 / 4.0

    def deriv(self, a):
        return np.asarray(a) / 2.0

    def deriv2(self, a):
        return np.full_like(np.asarray(a, dtype=float), 0.5)


QUADRATIC = QuadraticLoss()
