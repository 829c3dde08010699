from __future__ import annotations

import os
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qtorus import _kernels, _pykernels

ck = pytest.importorskip("qtorus._ckernels")

coeffs = st.one_of(st.integers(-5, 5), st.fractions(max_denominator=4)).filter(bool)
polys = st.dictionaries(st.integers(-50, 50), coeffs, max_size=6)
torus_keys = st.tuples(*[st.integers(-4, 4)] * 4)
torus = st.dictionaries(torus_keys, polys.filter(bool), max_size=4)


@given(polys, polys, st.integers(-10, 10))
def test_poly_mul_parity(a, b, bias):
    assert ck.poly_mul(a, b, bias) == _pykernels.poly_mul(a, b, bias)


@given(polys, polys, st.sampled_from([1, -1]))
def test_poly_add_parity(a, b, sign):
    assert ck.poly_add(a, b, sign) == _pykernels.poly_add(a, b, sign)


@given(torus, torus, st.integers(0, 3))
def test_twisted_mul_parity(a, b, bias):
    assert ck.twisted_mul(a, b, 2, 4, bias) == _pykernels.twisted_mul(a, b, 2, 4, bias)


def test_cancellation_drops_keys():
    a = {1: Fraction(1, 2), 2: 1}
    assert ck.poly_add(a, a, -1) == {} == _pykernels.poly_add(a, a, -1)


def test_backend_selection():
    assert _kernels.BACKEND == ("python" if os.environ.get("QTORUS_PURE", "") not in ("", "0") else "cython")
    code = "from qtorus import _kernels, pipelines as pl; print(_kernels.BACKEND); print(pl.trefoil_qaug(0))"
    outs = {}
    for pure in ("0", "1"):
        env = dict(os.environ, QTORUS_PURE=pure)
        proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True)
        outs[pure] = proc.stdout.splitlines()
    assert outs["0"][0] == "cython" and outs["1"][0] == "python"
    assert outs["0"][1] == outs["1"][1]
