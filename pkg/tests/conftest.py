import numpy as np
import pytest

from pam1d.potential import LowerTailSpec, PotentialSpec


@pytest.fixture
def atom_spec():
    """gamma = 0 mixture: atom at 0 (light) + exp-Pareto heavy branch."""
    return PotentialSpec(gamma=0.0, mix_q=0.2,
                         lower=LowerTailSpec.pareto(1.0), atom_p=0.5)


@pytest.fixture
def frechet_spec():
    """gamma = 1/2 mixture: Frechet light branch + exp-Pareto heavy branch."""
    return PotentialSpec(gamma=0.5, mix_q=0.2,
                         lower=LowerTailSpec.pareto(1.0), frechet_d=1.0)


@pytest.fixture
def bounded_spec():
    """Control case with all log-moments finite (W uniform on [0, 3])."""
    return PotentialSpec(gamma=0.0, mix_q=0.2,
                         lower=LowerTailSpec.bounded(3.0), atom_p=0.5)


def make_spec(gamma: float, zeta: float, mix_q: float = 0.2,
              atom_p: float = 0.5, frechet_d: float = 1.0) -> PotentialSpec:
    lower = LowerTailSpec.pareto(zeta)
    if gamma == 0.0:
        return PotentialSpec(gamma=gamma, mix_q=mix_q, lower=lower,
                             atom_p=atom_p)
    return PotentialSpec(gamma=gamma, mix_q=mix_q, lower=lower,
                         frechet_d=frechet_d)


def zero_field(lo: int, hi: int):
    """A Field with xi identically 0 on [lo, hi]."""
    from pam1d.potential import Field
    n = hi - lo + 1
    return Field(lo=lo, hi=hi, heavy=np.zeros(n, bool), values=np.zeros(n))


def constant_field(lo: int, hi: int, value: float):
    """A Field with constant light value (value <= 0) on [lo, hi]."""
    from pam1d.potential import Field
    n = hi - lo + 1
    return Field(lo=lo, hi=hi, heavy=np.zeros(n, bool),
                 values=np.full(n, float(value)))
