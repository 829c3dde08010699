# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twins of the functions in ``_pykernels``.

Keys and coefficients stay Python objects (exponents are unbounded ints,
coefficients are ints or Fractions); the gain comes from typed loops and
direct dict iteration.
"""

from cpython.dict cimport PyDict_Next, PyDict_GetItem, PyDict_SetItem, PyDict_DelItem
from cpython.ref cimport PyObject
from cpython.tuple cimport PyTuple_New, PyTuple_SET_ITEM, PyTuple_GET_ITEM
from cpython.ref cimport Py_INCREF


cdef inline void _acc(dict out, object k, object c):
    cdef PyObject* cur = PyDict_GetItem(out, k)
    if cur is NULL:
        if c:
            PyDict_SetItem(out, k, c)
        return
    v = <object>cur + c
    if v:
        PyDict_SetItem(out, k, v)
    else:
        PyDict_DelItem(out, k)


def poly_mul(dict a, dict b, object bias):
    if len(a) < len(b):
        a, b = b, a
    cdef dict out = {}
    cdef Py_ssize_t pa, pb
    cdef PyObject *ka
    cdef PyObject *ca
    cdef PyObject *kb
    cdef PyObject *cb
    pb = 0
    while PyDict_Next(b, &pb, &kb, &cb):
        shift = <object>kb - bias
        cbo = <object>cb
        pa = 0
        while PyDict_Next(a, &pa, &ka, &ca):
            _acc(out, <object>ka + shift, <object>ca * cbo)
    return out


def poly_add(dict a, dict b, int sign=1):
    cdef dict out = dict(a)
    cdef Py_ssize_t p = 0
    cdef PyObject *k
    cdef PyObject *c
    while PyDict_Next(b, &p, &k, &c):
        if sign == 1:
            _acc(out, <object>k, <object>c)
        else:
            _acc(out, <object>k, -<object>c)
    return out


def twisted_mul(dict a, dict b, Py_ssize_t ncomp, object qunit, object bias):
    cdef dict out = {}
    cdef dict acc
    cdef tuple ta, tb, key
    cdef Py_ssize_t i, n, pa, pb, pca, pcb
    cdef long long twist
    cdef PyObject *ka
    cdef PyObject *va
    cdef PyObject *kb
    cdef PyObject *vb
    cdef PyObject *k1
    cdef PyObject *c1
    cdef PyObject *k2
    cdef PyObject *c2
    pa = 0
    while PyDict_Next(a, &pa, &ka, &va):
        ta = <tuple>ka
        n = len(ta)
        pb = 0
        while PyDict_Next(b, &pb, &kb, &vb):
            tb = <tuple>kb
            twist = 0
            for i in range(ncomp):
                twist += (<long long>ta[2 * i + 1]) * (<long long>tb[2 * i])
            key = PyTuple_New(n)
            for i in range(n):
                s = <object>PyTuple_GET_ITEM(ta, i) + <object>PyTuple_GET_ITEM(tb, i)
                Py_INCREF(s)
                PyTuple_SET_ITEM(key, i, s)
            cur = out.get(key)
            if cur is None:
                acc = {}
                out[key] = acc
            else:
                acc = <dict>cur
            shift = twist * qunit - bias
            pcb = 0
            while PyDict_Next(<dict>vb, &pcb, &k2, &c2):
                s2 = <object>k2 + shift
                c2o = <object>c2
                pca = 0
                while PyDict_Next(<dict>va, &pca, &k1, &c1):
                    _acc(acc, <object>k1 + s2, <object>c1 * c2o)
    return {k: v for k, v in out.items() if v}
