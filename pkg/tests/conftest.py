import pathlib

import pytest

from rlv import efsm, ts
from rlv._kernels import warm_up

MODELS = pathlib.Path(__file__).resolve().parent.parent / "models"
GOLDEN = pathlib.Path(__file__).resolve().parent / "golden"

SUM_SMALL = """
system sum_small {
  nodes c0 c1 c2 ;
  var i : 0..3 ;
  var s : 0..3 ;
  var m : 0..2 ;
  trans c0 -> c1 { i := 0 ; s := 0 ; }
  trans c1 -> c1 when i < m { i := i + 1 ; s := s + i + 1 ; }
  trans c1 -> c2 when i >= m { }
}
"""


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    warm_up()


@pytest.fixture(scope="session")
def models_dir():
    return MODELS


@pytest.fixture(scope="session")
def golden_dir():
    return GOLDEN


@pytest.fixture(scope="session")
def sum_model():
    return efsm.parse_model((MODELS / "sum.rlv").read_text())


@pytest.fixture(scope="session")
def sum_system(sum_model):
    system, _ = efsm.expand(sum_model)
    return system


@pytest.fixture(scope="session")
def sum_small_system():
    system, _ = efsm.expand(efsm.parse_model(SUM_SMALL))
    return system


@pytest.fixture(scope="session")
def sum_loop(sum_model, sum_system):
    """The c1 self-loop sub-machine expanded, plus the host expansion."""
    sub_model = efsm.select_component(sum_model, [2], ["c1"])
    sub, _ = efsm.expand(sub_model)
    return sub


@pytest.fixture(scope="session")
def loop_certificate(sum_loop):
    """(l, r, q) of the running loop example over the loop component."""
    l = efsm.eval_pred("c = c1 && i = 0 && s = 0", sum_loop)
    r = efsm.eval_pred("c = c1 && i = m && s = i*(i+1) div 2", sum_loop)
    q = efsm.eval_pred("c = c1 && i < m && s = i*(i+1) div 2", sum_loop)
    return l, r, q


@pytest.fixture(scope="session")
def gcd_model():
    return efsm.parse_model((MODELS / "gcd.rlv").read_text())


@pytest.fixture(scope="session")
def gcd_system(gcd_model):
    system, _ = efsm.expand(gcd_model)
    return system


def make_system(n, edges, name="toy"):
    return ts.TransitionSystem([f"s{i}" for i in range(n)], edges, name=name)


@pytest.fixture
def chain3():
    """s0 -> s1 -> s2."""
    return make_system(3, [(0, 1), (1, 2)])
