"""Pure-Python reference kernels.

These are the inner loops of the coefficient ring and the quantum torus.
``_ckernels.pyx`` implements the same functions; both are exercised by the
test-suite and compared in ``benchmarks/bench_kernels.py``.

Sparse Laurent polynomials are plain dicts ``{packed_key: coefficient}``.
A packed key stores several biased exponents in one Python int, so adding
two keys and subtracting ``bias`` multiplies the monomials.
"""


def poly_mul(a, b, bias):
    """Product of two sparse Laurent polynomials with packed keys."""
    if len(a) < len(b):
        a, b = b, a
    out = {}
    get = out.get
    for kb, cb in b.items():
        shift = kb - bias
        for ka, ca in a.items():
            k = ka + shift
            c = get(k, 0) + ca * cb
            if c:
                out[k] = c
            else:
                out.pop(k, None)
    return out


def poly_add(a, b, sign=1):
    """``a + sign*b``; zero coefficients are dropped."""
    out = dict(a)
    get = out.get
    for k, c in b.items():
        v = get(k, 0) + (c if sign == 1 else -c)
        if v:
            out[k] = v
        else:
            out.pop(k, None)
    return out


def twisted_mul(a, b, ncomp, qunit, bias):
    """Normal-ordered product in the quantum torus.

    ``a`` and ``b`` map torus keys (tuples ``(l1, m1, l2, m2, ...)`` of
    doubled exponents) to Laurent coefficient dicts. Moving ``m_i^s`` past
    ``l_i^t`` costs ``q^(s*t)``; with both exponents doubled the product is
    already in quarter-powers of q, i.e. in units of ``qunit``.
    """
    out = {}
    for ta, ca in a.items():
        for tb, cb in b.items():
            twist = 0
            for i in range(ncomp):
                twist += ta[2 * i + 1] * tb[2 * i]
            key = tuple([u + v for u, v in zip(ta, tb)])
            shift = twist * qunit - bias
            acc = out.get(key)
            if acc is None:
                acc = out[key] = {}
            get = acc.get
            for kb, cb_ in cb.items():
                s = kb + shift
                for ka, ca_ in ca.items():
                    k = ka + s
                    c = get(k, 0) + ca_ * cb_
                    if c:
                        acc[k] = c
                    else:
                        acc.pop(k, None)
    return {k: v for k, v in out.items() if v}
