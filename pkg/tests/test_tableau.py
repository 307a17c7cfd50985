from fractions import Fraction as F

import numpy as np
import pytest

from hamevol import tableau
from hamevol.tableau import CASH_KARP


class TestExactValues:
    def test_selected_entries(self):
        assert CASH_KARP.c[0] == F(37, 378)
        assert CASH_KARP.b[5][4] == F(253, 4096)
        assert CASH_KARP.c_star[0] == F(2825, 27648)
        assert CASH_KARP.a[4] == 1

    def test_weights_sum_to_one(self):
        assert sum(CASH_KARP.c) == 1
        assert sum(CASH_KARP.c_star) == 1

    def test_row_sums_match_abscissae(self):
        for i in range(1, CASH_KARP.stages):
            assert sum(CASH_KARP.b[i]) == CASH_KARP.a[i]

    def test_fifth_order_conditions(self):
        # a few of the classical order conditions, exact in rationals
        c, a = CASH_KARP.c, CASH_KARP.a
        assert sum(ci * ai for ci, ai in zip(c, a)) == F(1, 2)
        assert sum(ci * ai**2 for ci, ai in zip(c, a)) == F(1, 3)
        assert sum(ci * ai**4 for ci, ai in zip(c, a)) == F(1, 5)


class TestFloatArrays:
    def test_float_identities(self):
        assert abs(tableau.C.sum() - 1) < 1e-15
        assert abs((tableau.C - tableau.DC).sum() - 1) < 1e-15
        np.testing.assert_allclose(tableau.B.sum(axis=1), tableau.A, atol=1e-15, rtol=0)

    def test_arrays_are_read_only(self):
        with pytest.raises(ValueError):
            tableau.C[0] = 0.0

    def test_lower_triangular(self):
        assert np.all(np.triu(tableau.B) == 0)
