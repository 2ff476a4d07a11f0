"""Vectorized complex double-double arithmetic.

A :class:`DDComplex` holds ``re = rh + rl`` and ``im = ih + il`` as four
float64 arrays with ``|rl| <= ulp(rh)/2``, giving about 32 significant
digits.  The error-free transformations are the classical ones of Dekker and
Knuth (``two_sum``, ``two_prod`` via Veltkamp splitting).  Only what the
quadrature engine needs is provided: ring operations, division, integer
powers, stacking, and conversion to and from ``mpmath``.
"""

from __future__ import annotations

import mpmath
import numpy as np

_SPLITTER = 134217729.0  # 2^27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    t, f = _two_sum(al, bl)
    e = e + t
    s, e = _quick_two_sum(s, e)
    e = e + f
    return _quick_two_sum(s, e)


def dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return _quick_two_sum(p, e)


def dd_div(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = dd_mul(q1, 0.0 * q1, bh, bl)
    rh, rl = dd_add(ah, al, -ph, -pl)
    q2 = rh / bh
    ph, pl = dd_mul(q2, 0.0 * q2, bh, bl)
    rh, rl = dd_add(rh, rl, -ph, -pl)
    q3 = rh / bh
    q1, q2 = _quick_two_sum(q1, q2)
    return dd_add(q1, q2, q3, 0.0 * q3)


def _mpf_split(x):
    hi = float(x)
    return hi, float(x - hi)


class DDComplex:
    """Array of complex double-double numbers."""

    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, rh, rl, ih, il):
        self.rh, self.rl, self.ih, self.il = (np.asarray(v, dtype=float) for v in np.broadcast_arrays(rh, rl, ih, il))

    # construction / conversion
    @classmethod
    def coerce(cls, x) -> "DDComplex":
        if isinstance(x, DDComplex):
            return x
        if isinstance(x, (mpmath.mpc, mpmath.mpf)):
            x = mpmath.mpc(x)
            rh, rl = _mpf_split(x.real)
            ih, il = _mpf_split(x.imag)
            return cls(rh, rl, ih, il)
        arr = np.asarray(x)
        if arr.dtype == object:
            return cls.from_mp(arr)
        arr = arr.astype(complex)
        zero = np.zeros(arr.shape)
        return cls(arr.real, zero, arr.imag, zero)

    @classmethod
    def from_mp(cls, values) -> "DDComplex":
        flat = [mpmath.mpc(v) for v in np.asarray(values, dtype=object).ravel()]
        shape = np.shape(values)
        parts = np.array([(*_mpf_split(v.real), *_mpf_split(v.imag)) for v in flat]).reshape(shape + (4,))
        return cls(parts[..., 0], parts[..., 1], parts[..., 2], parts[..., 3])

    def to_mp(self) -> np.ndarray:
        """Object array of ``mpmath.mpc`` carrying the full double-double value."""
        out = np.empty(self.shape, dtype=object)
        it = np.nditer([self.rh, self.rl, self.ih, self.il], flags=["multi_index"])
        for rh, rl, ih, il in it:
            re = mpmath.fadd(float(rh), float(rl), exact=True)
            im = mpmath.fadd(float(ih), float(il), exact=True)
            out[it.multi_index] = mpmath.mpc(re, im)
        return out

    def to_complex(self) -> np.ndarray:
        return (self.rh + self.rl) + 1j * (self.ih + self.il)

    @property
    def shape(self):
        return self.rh.shape

    @property
    def ndim(self):
        return self.rh.ndim

    def __len__(self):
        return len(self.rh)

    def __getitem__(self, idx):
        return DDComplex(self.rh[idx], self.rl[idx], self.ih[idx], self.il[idx])

    def __repr__(self):
        return f"DDComplex(shape={self.shape})"

    # arithmetic
    def __neg__(self):
        return DDComplex(-self.rh, -self.rl, -self.ih, -self.il)

    def __add__(self, other):
        o = DDComplex.coerce(other)
        rh, rl = dd_add(self.rh, self.rl, o.rh, o.rl)
        ih, il = dd_add(self.ih, self.il, o.ih, o.il)
        return DDComplex(rh, rl, ih, il)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-DDComplex.coerce(other))

    def __rsub__(self, other):
        return DDComplex.coerce(other) + (-self)

    def __mul__(self, other):
        o = DDComplex.coerce(other)
        ach, acl = dd_mul(self.rh, self.rl, o.rh, o.rl)
        bdh, bdl = dd_mul(self.ih, self.il, o.ih, o.il)
        adh, adl = dd_mul(self.rh, self.rl, o.ih, o.il)
        bch, bcl = dd_mul(self.ih, self.il, o.rh, o.rl)
        rh, rl = dd_add(ach, acl, -bdh, -bdl)
        ih, il = dd_add(adh, adl, bch, bcl)
        return DDComplex(rh, rl, ih, il)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = DDComplex.coerce(other)
        cch, ccl = dd_mul(o.rh, o.rl, o.rh, o.rl)
        ddh, ddl = dd_mul(o.ih, o.il, o.ih, o.il)
        nh, nl = dd_add(cch, ccl, ddh, ddl)
        num = self * DDComplex(o.rh, o.rl, -o.ih, -o.il)
        rh, rl = dd_div(num.rh, num.rl, nh, nl)
        ih, il = dd_div(num.ih, num.il, nh, nl)
        return DDComplex(rh, rl, ih, il)

    def __rtruediv__(self, other):
        return DDComplex.coerce(other) / self

    def __pow__(self, k: int):
        if int(k) != k or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        k = int(k)
        result = DDComplex.coerce(np.ones(self.shape, dtype=complex))
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def sum(self, axis=-1) -> "DDComplex":
        """Pairwise double-double summation along ``axis``."""
        rh, rl, ih, il = (np.moveaxis(v, axis, -1) for v in (self.rh, self.rl, self.ih, self.il))
        while rh.shape[-1] > 1:
            if rh.shape[-1] % 2:
                pad = [(0, 0)] * (rh.ndim - 1) + [(0, 1)]
                rh, rl, ih, il = (np.pad(v, pad) for v in (rh, rl, ih, il))
            rh, rl = dd_add(rh[..., ::2], rl[..., ::2], rh[..., 1::2], rl[..., 1::2])
            ih, il = dd_add(ih[..., ::2], il[..., ::2], ih[..., 1::2], il[..., 1::2])
        return DDComplex(rh[..., 0], rl[..., 0], ih[..., 0], il[..., 0])


def stack(items) -> DDComplex:
    items = [DDComplex.coerce(v) for v in items]
    return DDComplex(*(np.stack([getattr(v, f) for v in items]) for f in ("rh", "rl", "ih", "il")))


def unit_roots(N: int) -> DDComplex:
    """``exp(-2 pi i s / N)`` for ``s = 0..N-1`` to double-double accuracy (cached)."""
    if N not in _ROOTS:
        with mpmath.workdps(40):
            _ROOTS[N] = DDComplex.from_mp([mpmath.expjpi(mpmath.mpf(-2 * s) / N) for s in range(N)])
    return _ROOTS[N]


_ROOTS: dict = {}
