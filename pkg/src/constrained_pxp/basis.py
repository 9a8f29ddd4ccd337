"""Constrained spin-1 configuration spaces.

A configuration of ``L`` spin-1 sites is packed into a base-3 integer: site
``i`` occupies digit ``i`` (weight ``3**i``) and the digit values 0, 1, 2 stand
for the local states ``|->``, ``|0>``, ``|+>``.  Site 0 is the leftmost
character when a configuration is rendered as a string.

Constraints are sets of forbidden ordered nearest-neighbour pairs.  Under
periodic boundaries the pair (site L-1, site 0) is checked as well.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import LengthTooLarge, UnsupportedModel

SPIN_CHARS = "-0+"
SPIN_VALUES = np.array([-1, 0, 1], dtype=np.int8)
MINUS, ZERO, PLUS = 0, 1, 2

DEFAULT_BUDGET = 50_000_000


class Boundary(str, enum.Enum):
    OBC = "OBC"
    PBC = "PBC"

    @classmethod
    def parse(cls, value: "str | Boundary") -> "Boundary":
        if isinstance(value, Boundary):
            return value
        return cls(value.upper())


def _parse_pair(token: str) -> tuple[int, int]:
    token = token.strip()
    if len(token) != 2 or any(c not in SPIN_CHARS for c in token):
        raise ValueError(f"bad constraint pair {token!r}; expected two of '-0+'")
    return SPIN_CHARS.index(token[0]), SPIN_CHARS.index(token[1])


@dataclass(frozen=True)
class ConstraintSet:
    """Forbidden ordered nearest-neighbour pairs, as digit tuples ``(left, right)``."""

    forbidden: frozenset[tuple[int, int]]
    name: str = "OTHER"

    @classmethod
    def from_pairs(cls, pairs: "str | Iterable[str]", name: str | None = None) -> "ConstraintSet":
        """Build from spin strings, e.g. ``"00,+0,0+"`` or ``["00", "++"]``."""
        if isinstance(pairs, str):
            pairs = [p for p in pairs.split(",") if p.strip()]
        forbidden = frozenset(_parse_pair(p) for p in pairs)
        if name is None:
            name = next((k for k, v in PRESETS.items() if v.forbidden == forbidden), "OTHER")
        return cls(forbidden, name)

    def allowed_matrix(self) -> np.ndarray:
        """3x3 0/1 matrix with ``T[a, b] = 0`` iff ``(a, b)`` is forbidden."""
        T = np.ones((3, 3), dtype=np.int64)
        for a, b in self.forbidden:
            T[a, b] = 0
        return T

    def without(self, pair: tuple[int, int]) -> "ConstraintSet":
        return ConstraintSet(self.forbidden - {pair})

    def pair_strings(self) -> list[str]:
        return sorted(SPIN_CHARS[a] + SPIN_CHARS[b] for a, b in self.forbidden)

    def is_allowed(self, config: str) -> bool:
        """Check an OBC string; wrap-around is the caller's business."""
        digits = decode_string(config)
        return all((a, b) not in self.forbidden for a, b in zip(digits, digits[1:]))


PRESETS: dict[str, ConstraintSet] = {
    "MODEL_I": ConstraintSet(frozenset({(1, 1), (2, 1), (1, 2)}), "MODEL_I"),
    "MODEL_II": ConstraintSet(frozenset({(1, 1)}), "MODEL_II"),
    "MODEL_III": ConstraintSet(frozenset({(1, 1), (2, 2)}), "MODEL_III"),
    "PXP_SPIN1": ConstraintSet(frozenset({(1, 1), (2, 1), (1, 2), (2, 2)}), "PXP_SPIN1"),
    "FREE": ConstraintSet(frozenset(), "FREE"),
}
MODEL_I = PRESETS["MODEL_I"]
MODEL_II = PRESETS["MODEL_II"]
MODEL_III = PRESETS["MODEL_III"]
PXP_SPIN1 = PRESETS["PXP_SPIN1"]
FREE = PRESETS["FREE"]

_ALIASES = {
    "I": "MODEL_I", "1": "MODEL_I", "II": "MODEL_II", "2": "MODEL_II",
    "III": "MODEL_III", "3": "MODEL_III", "PXP1": "PXP_SPIN1", "PXP": "PXP_SPIN1",
}


def preset(name: str) -> ConstraintSet:
    """Look up a preset by tag (``MODEL_I``) or short alias (``I``, ``pxp1``, ``free``)."""
    key = name.strip().upper().replace("-", "_")
    key = _ALIASES.get(key, key)
    if key.startswith("MODEL") and "_" not in key:
        key = "MODEL_" + key[5:]
    try:
        return PRESETS[key]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from I, II, III, free, pxp1") from None


def encode(digits: Iterable[int]) -> int:
    code = 0
    for i, d in enumerate(digits):
        code += int(d) * 3**i
    return code


def decode(code: int, L: int) -> list[int]:
    out = []
    for _ in range(L):
        code, d = divmod(code, 3)
        out.append(d)
    return out


def encode_string(config: str) -> int:
    return encode(SPIN_CHARS.index(c) for c in config)


def decode_string(config: str) -> list[int]:
    return [SPIN_CHARS.index(c) for c in config]


def code_to_string(code: int, L: int) -> str:
    return "".join(SPIN_CHARS[d] for d in decode(code, L))


def digits_of(codes: np.ndarray, L: int) -> np.ndarray:
    """Vectorised decode: returns an ``(n, L)`` uint8 array of site digits."""
    codes = np.asarray(codes, dtype=np.int64)
    out = np.empty((codes.size, L), dtype=np.uint8)
    rest = codes.copy()
    for i in range(L):
        out[:, i] = rest % 3
        rest //= 3
    return out


def codes_of(digits: np.ndarray) -> np.ndarray:
    digits = np.asarray(digits, dtype=np.int64)
    L = digits.shape[-1]
    return digits @ (3 ** np.arange(L, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class ConstrainedBasis:
    """Sorted codes of every configuration that violates no forbidden pair."""

    constraint: ConstraintSet
    boundary: Boundary
    L: int
    codes: np.ndarray
    _digits: list = field(default_factory=list, repr=False)

    def __len__(self) -> int:
        return int(self.codes.size)

    @property
    def dim(self) -> int:
        return int(self.codes.size)

    @property
    def digits(self) -> np.ndarray:
        if not self._digits:
            self._digits.append(digits_of(self.codes, self.L))
        return self._digits[0]

    @property
    def magnetizations(self) -> np.ndarray:
        """Total S^z of every basis state."""
        return self.digits.astype(np.int64).sum(axis=1) - self.L

    def lookup(self, codes) -> np.ndarray:
        """Positions of ``codes`` in the basis, -1 where absent."""
        codes = np.asarray(codes, dtype=np.int64)
        pos = np.searchsorted(self.codes, codes)
        pos = np.minimum(pos, self.dim - 1)
        hit = self.codes[pos] == codes
        return np.where(hit, pos, -1)

    def index(self, config: "str | int") -> int:
        code = encode_string(config) if isinstance(config, str) else int(config)
        pos = int(self.lookup(np.array([code]))[0])
        if pos < 0:
            raise KeyError(f"{config!r} is not in the basis")
        return pos

    def __contains__(self, config) -> bool:
        code = encode_string(config) if isinstance(config, str) else int(config)
        return bool(self.lookup(np.array([code]))[0] >= 0)

    def state_string(self, i: int) -> str:
        return code_to_string(int(self.codes[i]), self.L)

    def strings(self) -> list[str]:
        return ["".join(SPIN_CHARS[d] for d in row) for row in self.digits]

    def basis_vector(self, config: str) -> np.ndarray:
        v = np.zeros(self.dim)
        v[self.index(config)] = 1.0
        return v

    def header(self) -> str:
        return (f"# constraint={self.constraint.name} L={self.L} "
                f"bc={self.boundary.value} dim={self.dim}")

    def export(self, path: "str | Path") -> None:
        """Write one configuration per line under a one-line header."""
        lines = [self.header(), *self.strings()]
        Path(path).write_text("\n".join(lines) + "\n")


def enumerate_basis(constraint: ConstraintSet, L: int, boundary: "Boundary | str" = Boundary.PBC,
                    budget: int = DEFAULT_BUDGET) -> ConstrainedBasis:
    """Enumerate all constraint-satisfying configurations, sorted by code.

    Configurations are grown one site at a time and pruned as soon as the new
    bond is forbidden, so the work is proportional to the final dimension.
    """
    boundary = Boundary.parse(boundary)
    if L < 1:
        raise ValueError("L must be at least 1")
    required = count_dimension(constraint, L, boundary)
    if required > budget:
        raise LengthTooLarge(required, budget)
    if L > 39:
        raise LengthTooLarge(3**L, 3**39)
    allowed = constraint.allowed_matrix().astype(bool)

    codes = np.arange(3, dtype=np.int64)
    last = codes.copy()
    for site in range(1, L):
        weight = np.int64(3**site)
        new_codes, new_last = [], []
        for b in range(3):
            keep = allowed[last, b]
            new_codes.append(codes[keep] + b * weight)
            new_last.append(np.full(int(keep.sum()), b, dtype=np.int64))
        codes = np.concatenate(new_codes)
        last = np.concatenate(new_last)
    if boundary is Boundary.PBC and L > 1:
        first = codes % 3
        codes = codes[allowed[last, first]]
    codes = np.sort(codes)
    return ConstrainedBasis(constraint, boundary, L, codes)


def _matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(3)) for j in range(3)] for i in range(3)]


def _matpow(T, n: int):
    R = [[int(i == j) for j in range(3)] for i in range(3)]
    while n:
        if n & 1:
            R = _matmul(R, T)
        T = _matmul(T, T)
        n >>= 1
    return R


def count_dimension(constraint: ConstraintSet, L: int, boundary: "Boundary | str" = Boundary.PBC) -> int:
    """Exact dimension from integer powers of the 3x3 transfer matrix."""
    boundary = Boundary.parse(boundary)
    if L < 1:
        raise ValueError("L must be at least 1")
    T = constraint.allowed_matrix().tolist()
    if boundary is Boundary.OBC:
        P = _matpow(T, L - 1)
        return sum(sum(row) for row in P)
    if L == 1:
        # a single site has no bond with itself
        return 3
    P = _matpow(T, L)
    return sum(P[i][i] for i in range(3))


def growth_rate(constraint: ConstraintSet) -> float:
    """Largest eigenvalue of the transfer matrix (asymptotic d_{L+1}/d_L)."""
    return float(np.max(np.abs(np.linalg.eigvals(constraint.allowed_matrix().astype(float)))))


def closed_form_dimension(model: "str | ConstraintSet", L: int) -> float:
    """OBC dimension from the closed forms known for Models II and III."""
    name = model.name if isinstance(model, ConstraintSet) else preset(model).name
    if name == "MODEL_II":
        r3 = math.sqrt(3.0)
        return ((1 - r3) ** L * (r3 - 2) + (1 + r3) ** L * (r3 + 2)) / (2 * r3)
    if name == "MODEL_III":
        r2 = math.sqrt(2.0)
        return ((1 - r2) ** (L + 1) + (1 + r2) ** (L + 1)) / 2
    raise UnsupportedModel(f"no closed-form dimension for {name}")
