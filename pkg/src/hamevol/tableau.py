"""Cash-Karp 5(4) Butcher tableau.

The rational coefficients are kept as :class:`fractions.Fraction` so the
consistency identities can be checked exactly; the float arrays used by the
steppers are derived from them once at import time.
"""

from dataclasses import dataclass
from fractions import Fraction as F

import numpy as np


@dataclass(frozen=True)
class CashKarpTableau:
    """Stage abscissae ``a``, stage weights ``b`` (row i uses columns < i),
    fifth-order weights ``c`` and embedded fourth-order weights ``c_star``."""

    a: tuple
    b: tuple
    c: tuple
    c_star: tuple

    @property
    def stages(self):
        return len(self.c)

    def arrays(self):
        """Return ``(a, b, c, c - c_star)`` as float64 arrays."""
        s = self.stages
        b = np.zeros((s, s))
        for i, row in enumerate(self.b):
            b[i, : len(row)] = [float(x) for x in row]
        a = np.array([float(x) for x in self.a])
        c = np.array([float(x) for x in self.c])
        dc = np.array([float(x - y) for x, y in zip(self.c, self.c_star)])
        return a, b, c, dc


CASH_KARP = CashKarpTableau(
    a=(F(0), F(1, 5), F(3, 10), F(3, 5), F(1), F(7, 8)),
    b=(
        (),
        (F(1, 5),),
        (F(3, 40), F(9, 40)),
        (F(3, 10), F(-9, 10), F(6, 5)),
        (F(-11, 54), F(5, 2), F(-70, 27), F(35, 27)),
        (F(1631, 55296), F(175, 512), F(575, 13824), F(44275, 110592), F(253, 4096)),
    ),
    c=(F(37, 378), F(0), F(250, 621), F(125, 594), F(0), F(512, 1771)),
    c_star=(
        F(2825, 27648),
        F(0),
        F(18575, 48384),
        F(13525, 55296),
        F(277, 14336),
        F(1, 4),
    ),
)

A, B, C, DC = CASH_KARP.arrays()
for _arr in (A, B, C, DC):
    _arr.setflags(write=False)
