import os
import subprocess
import sys

import pytest

SCRIPT = """
import math, numpy as np
from qrlimits import backend, metrics as met, capacity as cap
print(backend())
print(repr(met.k_dist_estimate(met.UNIT_BALL, np.zeros(2), np.array([0.5, 0.0]))))
print(repr(cap.capacity_estimate(cap.CondenserGrid.ring(2, 0.5, 1.0, 16), 1e-10)))
"""


def _run(flag):
    env = dict(os.environ)
    env.pop("QRLIMITS_DISABLE_NUMBA", None)
    if flag is not None:
        env["QRLIMITS_DISABLE_NUMBA"] = flag
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return out.stdout.split()


def test_env_flag_selects_numpy():
    fast, slow = _run(None), _run("1")
    assert fast[0] == "numba" and slow[0] == "numpy"
    assert float(fast[1]) == pytest.approx(float(slow[1]), rel=1e-12)
    assert float(fast[2]) == pytest.approx(float(slow[2]), rel=1e-9)


def test_falsy_flag_keeps_numba():
    assert _run("0")[0] == "numba"
