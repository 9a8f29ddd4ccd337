"""Brute-force reference implementations used only by the tests.

Everything here works in the unconstrained 3^L space (or the 2^L spin-1/2
space) with Kronecker products and explicit loops, sharing no code with the
package beyond the digit convention: site i is the i-th base-3 digit and
0, 1, 2 mean -, 0, +.
"""

import itertools
from functools import reduce

import numpy as np
import scipy.sparse as sp

SX = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]]) / np.sqrt(2)
SPLUS = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]]) * 1.0  # |0><-| + |+><0|
SMINUS = SPLUS.T.copy()


def allowed(digits, forbidden, periodic):
    L = len(digits)
    bonds = [(i, i + 1) for i in range(L - 1)]
    if periodic and L > 1:
        bonds.append((L - 1, 0))
    return all((digits[a], digits[b]) not in forbidden for a, b in bonds)


def brute_codes(forbidden, L, periodic):
    """Sorted codes of all allowed configurations, by exhaustive enumeration."""
    out = []
    for digits in itertools.product(range(3), repeat=L):
        if allowed(digits, forbidden, periodic):
            out.append(sum(d * 3**i for i, d in enumerate(digits)))
    return np.array(sorted(out), dtype=np.int64)


def site_operator(op, site, L):
    """``op`` on ``site`` in the full 3^L space, index = sum d_i 3^i."""
    factors = [sp.identity(3, format="csr")] * L
    factors[site] = sp.csr_matrix(op)
    # the leftmost kron factor is the most significant digit, i.e. site L-1
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), factors[::-1])


def full_space_projector(forbidden, L, periodic):
    mask = np.zeros(3**L)
    mask[brute_codes(forbidden, L, periodic)] = 1.0
    return sp.diags(mask, format="csr")


def dense_projected_hamiltonian(forbidden, L, periodic):
    """``P (sum_i S^x_i) P`` restricted to the allowed configurations (dense)."""
    codes = brute_codes(forbidden, L, periodic)
    P = full_space_projector(forbidden, L, periodic)
    H = sum(site_operator(SX, i, L) for i in range(L))
    return (P @ H @ P)[codes][:, codes].toarray(), codes


def fsa_oracle(forbidden, L, steps=None):
    """FSA from |-+-+...> in the full 3^L space; returns (beta, delta_norm2)."""
    codes = brute_codes(forbidden, L, True)
    P = full_space_projector(forbidden, L, True)
    Hp = sum(site_operator(SPLUS if i % 2 == 0 else SMINUS, i, L) for i in range(L)) / np.sqrt(2)
    Hp = P @ Hp @ P
    Hm = Hp.T
    z2 = sum((0 if i % 2 == 0 else 2) * 3**i for i in range(L))
    assert z2 in set(codes.tolist())
    v = np.zeros(3**L)
    v[z2] = 1.0
    betas, deltas = [], []
    for _ in range(steps or 2 * L):
        w = Hp @ v
        b = np.linalg.norm(w)
        u = w / b
        deltas.append(np.linalg.norm(Hm @ u - b * v) ** 2)
        betas.append(b)
        v = u
    return np.array(betas), np.array(deltas)


def spin_half_pxp(L, periodic=True):
    """Spin-1/2 PXP chain built from bitmasks: flip bit i when both neighbours are 0."""
    states = [s for s in range(2**L)
              if not any((s >> i) & 1 and (s >> ((i + 1) % L)) & 1
                         for i in range(L if periodic else L - 1))]
    index = {s: n for n, s in enumerate(states)}
    H = np.zeros((len(states), len(states)))
    for s in states:
        for i in range(L):
            t = s ^ (1 << i)
            if t in index:
                H[index[t], index[s]] = 1.0
    return H


def svd_entropy(vec, codes, L, cut):
    """Entropy from an explicit 3^cut x 3^(L-cut) amplitude matrix."""
    M = np.zeros((3**cut, 3 ** (L - cut)), dtype=vec.dtype)
    for a, c in zip(vec, codes):
        M[c % 3**cut, c // 3**cut] += a
    p = np.linalg.svd(M, compute_uv=False) ** 2
    p = p[p > 1e-15]
    return float(-(p * np.log(p)).sum())


def brute_codes_vectorized(constraints, L):
    """Allowed codes for several constraint sets, both boundaries.

    Sweeps all 3^L codes with numpy; returns ``{(name, periodic): codes}``.
    """
    codes = np.arange(3**L, dtype=np.int64)
    digits = [((codes // 3**i) % 3).astype(np.int8) for i in range(L)]
    out = {}
    for c in constraints:
        open_ok = np.ones(codes.size, dtype=bool)
        for a in range(L - 1):
            for x, y in c.forbidden:
                open_ok &= ~((digits[a] == x) & (digits[a + 1] == y))
        ring_ok = open_ok.copy()
        if L > 1:
            for x, y in c.forbidden:
                ring_ok &= ~((digits[L - 1] == x) & (digits[0] == y))
        out[(c.name, False)] = np.flatnonzero(open_ok)
        out[(c.name, True)] = np.flatnonzero(ring_ok)
    return out


class QuadraticInt:
    """Exact arithmetic in Z[sqrt d]: value a + b sqrt(d)."""

    def __init__(self, a, b, d):
        self.a, self.b, self.d = a, b, d

    def __add__(self, o):
        return QuadraticInt(self.a + o.a, self.b + o.b, self.d)

    def __mul__(self, o):
        return QuadraticInt(self.a * o.a + self.d * self.b * o.b, self.a * o.b + self.b * o.a, self.d)

    def __pow__(self, n):
        r = QuadraticInt(1, 0, self.d)
        for _ in range(n):
            r = r * self
        return r


def exact_closed_form_model2(L):
    """((1-r)^L (r-2) + (1+r)^L (r+2)) / (2r) with r = sqrt 3, as an exact integer."""
    r = lambda a, b: QuadraticInt(a, b, 3)
    num = (r(1, -1) ** L) * r(-2, 1) + (r(1, 1) ** L) * r(2, 1)
    # num / (2 sqrt 3) = (a + b sqrt 3) / (2 sqrt 3) is rational only if a == 0
    assert num.a == 0 and num.b % 2 == 0
    return num.b // 2


def exact_closed_form_model3(L):
    """((1-r)^(L+1) + (1+r)^(L+1)) / 2 with r = sqrt 2, as an exact integer."""
    r = lambda a, b: QuadraticInt(a, b, 2)
    num = r(1, -1) ** (L + 1) + r(1, 1) ** (L + 1)
    assert num.b == 0 and num.a % 2 == 0
    return num.a // 2
