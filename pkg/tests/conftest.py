import numpy as np
import pytest
from hypothesis import strategies as st

from stadirac.koga_field import FieldParams, SpacetimePoint
from stadirac.sta import Multivector

ACCEPTANCE_RESULTS: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def natural():
    return FieldParams()


@pytest.fixture(params=[0.0, 0.3], ids=["kappa0", "kappa0.3"])
def params(request):
    return FieldParams(kappa=request.param)


coeff = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
multivectors = st.lists(coeff, min_size=16, max_size=16).map(lambda c: Multivector(np.array(c)))
even_multivectors = multivectors.map(lambda m: Multivector(np.where([bin(i).count("1") % 2 == 0 for i in range(16)], m.coeff, 0.0)))
angles = st.floats(min_value=-20, max_value=20, allow_nan=False)


@st.composite
def field_points(draw, r_lo=0.1, r_hi=10.0):
    """Points with r in [r_lo, r_hi] and t in [0, 10]."""
    r = draw(st.floats(min_value=r_lo, max_value=r_hi))
    cos_th = draw(st.floats(min_value=-1, max_value=1))
    ph = draw(st.floats(min_value=0, max_value=2 * np.pi))
    t = draw(st.floats(min_value=0, max_value=10))
    s = np.sqrt(1 - cos_th**2)
    return SpacetimePoint(t, r * s * np.cos(ph), r * s * np.sin(ph), r * cos_th)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        name, ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {name}: {detail}")
