"""Kernel backends: numba vs numpy agreement and env-flag selection."""

import os
import subprocess
import sys

import numpy as np
import pytest

from freestein import _kernels
from freestein.analytic import MeasureSpec

HAVE_NUMBA = _kernels.BACKEND == "numba"

BERN = MeasureSpec.atomic([(-1.0, 0.5), (1.0, 0.5)])
SEMI = MeasureSpec.semicircle(0.0, 1.0)
GRID_Z = (np.linspace(-3, 3, 257) + 1j * 1e-3).astype(complex)
HIGH_Z = (np.linspace(-3, 3, 31) + 2j).astype(complex)


@pytest.mark.parametrize("z", [GRID_Z, HIGH_Z], ids=["near-axis", "high"])
@pytest.mark.parametrize("mu", [BERN, SEMI], ids=["atomic", "semicircle"])
def test_cauchy_backends_agree(mu, z):
    active = _kernels.cauchy_vals(z, *mu.descriptor())
    reference = _kernels._g_vec(*mu.descriptor()[:3], *mu.descriptor()[3:], z)
    assert np.abs(active - reference).max() < 1e-13


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba backend not active")
@pytest.mark.parametrize("n", [2, 16, 128])
def test_nfold_backends_agree(n):
    import math

    desc = BERN.dilate(1.0 / math.sqrt(n)).descriptor()
    args = (float(n), 1e-13, 10_000, 1_000)
    om_nb, _, res_nb = _kernels.nfold_omega(GRID_Z, *desc, *args)
    om_np, _, res_np = _kernels._nfold_omega_numpy(GRID_Z, *desc, *args)
    # same fixed point regardless of iteration path
    assert np.abs(om_nb - om_np).max() < 1e-10
    assert res_nb.max() < 1e-10 and res_np.max() < 1e-10


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba backend not active")
def test_pair_backends_agree():
    da = BERN.dilate(0.7)
    db = SEMI.dilate(0.5)
    args = (1e-13, 10_000, 1_000)
    o1_nb, o2_nb, _, _ = _kernels.pair_omega(GRID_Z, *da.descriptor(), *db.descriptor(), *args)
    o1_np, o2_np, _, _ = _kernels._pair_omega_numpy(
        GRID_Z, *da.descriptor(), *db.descriptor(), *args
    )
    assert np.abs(o1_nb - o1_np).max() < 1e-10
    # omega2 = z + h_a(omega1) amplifies last-ulp omega1 differences by
    # |F_a'| near spectral edges; the transform values are what must match
    assert np.abs(o2_nb - o2_np).max() < 1e-7
    g_nb = _kernels.cauchy_vals(o1_nb, *da.descriptor())
    g_np = _kernels.cauchy_vals(o1_np, *da.descriptor())
    assert np.abs(g_nb - g_np).max() < 1e-10


@pytest.mark.parametrize("choice,expected", [("numpy", "numpy"), ("auto", None)])
def test_env_flag_selects_backend(choice, expected):
    env = dict(os.environ, FREESTEIN_KERNELS=choice)
    out = subprocess.run(
        [sys.executable, "-c", "from freestein import _kernels; print(_kernels.BACKEND)"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    backend = out.stdout.strip()
    if expected is None:
        assert backend in ("numba", "numpy")
    else:
        assert backend == expected


def test_bad_env_flag_rejected():
    env = dict(os.environ, FREESTEIN_KERNELS="cuda")
    out = subprocess.run(
        [sys.executable, "-c", "import freestein._kernels"],
        env=env,
        capture_output=True,
        text=True,
    )
    assert out.returncode != 0
    assert "FREESTEIN_KERNELS" in out.stderr
