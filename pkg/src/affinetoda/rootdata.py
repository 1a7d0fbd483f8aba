"""Exact root-system combinatorics for the simple Lie types of rank <= 8.

Everything in this module is computed in exact rational arithmetic;
floating point enters only in the numerical layers built on top.  A root
is represented by its integer coefficient tuple over the simple roots,
and the inner product is the symmetrized Cartan form with long roots
normalized to squared length 2.

Conventions fixed here and relied on everywhere else:

* ``cartan_matrix[i][j] = alpha_j(h_i)``, i.e. row index carries the coroot.
* positive roots are ordered by height, then lexicographically by
  coefficient tuple, so the highest root is always last.
* node numbering per family: A/B/C are chains 1..l (B: last node short,
  C: last node long); D is a chain 1..l-1 with node l attached to l-2;
  E is a chain 1..l-1 with node l attached to l-3; F4 has the double bond
  between nodes 2 and 3 (nodes 3,4 short); G2 has node 1 short.
* affine data lists the extra node first (index 0, the lowered highest
  root), followed by nodes 1..l in the finite order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, List, Sequence, Tuple

Root = Tuple[int, ...]

_RANK_BOUNDS = {
    "A": (1, 8),
    "B": (2, 8),
    "C": (2, 8),
    "D": (3, 8),
    "E": (6, 8),
    "F": (4, 4),
    "G": (2, 2),
}

# dimension of the adjoint representation, used as a cross-check only
_DIM = {
    "A": lambda l: l * (l + 2),
    "B": lambda l: l * (2 * l + 1),
    "C": lambda l: l * (2 * l + 1),
    "D": lambda l: l * (2 * l - 1),
    "E": lambda l: {6: 78, 7: 133, 8: 248}[l],
    "F": lambda l: 52,
    "G": lambda l: 14,
}


@dataclass(frozen=True)
class LieType:
    """A simple type, e.g. LieType('A', 2)."""

    family: str
    rank: int

    def __post_init__(self):
        if self.family not in _RANK_BOUNDS:
            raise ValueError(f"unknown family {self.family!r}")
        lo, hi = _RANK_BOUNDS[self.family]
        if not (lo <= self.rank <= hi):
            raise ValueError(
                f"rank {self.rank} out of range [{lo}, {hi}] for family {self.family}"
            )

    @staticmethod
    def parse(name: str) -> "LieType":
        name = name.strip().replace("_", "")
        if len(name) < 2:
            raise ValueError(f"cannot parse Lie type {name!r}")
        fam, rank = name[0].upper(), name[1:]
        if not rank.isdigit():
            raise ValueError(f"cannot parse Lie type {name!r}")
        return LieType(fam, int(rank))

    def __str__(self) -> str:
        return f"{self.family}{self.rank}"

    @property
    def dim(self) -> int:
        return _DIM[self.family](self.rank)


def _cartan_and_norms(lt: LieType) -> Tuple[List[List[int]], List[Fraction]]:
    """Cartan matrix M[i][j] = alpha_j(h_i) and half-norms d_i = (a_i,a_i)/2."""
    l = lt.rank
    M = [[2 if i == j else 0 for j in range(l)] for i in range(l)]

    def chain(i, j):  # single bond
        M[i][j] = -1
        M[j][i] = -1

    for i in range(l - 1):
        chain(i, i + 1)
    d = [Fraction(1)] * l

    if lt.family == "B":  # last simple root short
        M[l - 2][l - 1] = -1
        M[l - 1][l - 2] = -2
        d[l - 1] = Fraction(1, 2)
    elif lt.family == "C":  # last simple root long
        M[l - 2][l - 1] = -2
        M[l - 1][l - 2] = -1
        d = [Fraction(1, 2)] * (l - 1) + [Fraction(1)]
    elif lt.family == "D":
        M[l - 2][l - 1] = M[l - 1][l - 2] = 0
        chain(l - 3, l - 1)
    elif lt.family == "E":
        M[l - 2][l - 1] = M[l - 1][l - 2] = 0
        chain(l - 4, l - 1)
    elif lt.family == "F":
        M[1][2] = -1
        M[2][1] = -2
        d = [Fraction(1), Fraction(1), Fraction(1, 2), Fraction(1, 2)]
    elif lt.family == "G":  # first simple root short
        M[0][1] = -3
        M[1][0] = -1
        d = [Fraction(1, 3), Fraction(1)]

    # d_i * M[i][j] must be a symmetric matrix (it equals (alpha_i, alpha_j))
    for i in range(l):
        for j in range(l):
            assert d[i] * M[i][j] == d[j] * M[j][i]
    return M, d


@dataclass(frozen=True, eq=False)
class RootSystem:
    """Positive roots, Cartan data and pairings for one simple type."""

    type: LieType
    cartan_matrix: Tuple[Tuple[int, ...], ...]
    norms: Tuple[Fraction, ...]  # d_i = (alpha_i, alpha_i) / 2
    positive_roots: Tuple[Root, ...]  # ordered by (height, lex)
    _index: Dict[Root, int] = field(repr=False, default_factory=dict)

    @property
    def rank(self) -> int:
        return self.type.rank

    @property
    def num_positive(self) -> int:
        return len(self.positive_roots)

    @property
    def highest_root(self) -> Root:
        return self.positive_roots[-1]

    def simple_root(self, i: int) -> Root:
        return tuple(1 if j == i else 0 for j in range(self.rank))

    def index(self, root: Root) -> int:
        return self._index[root]

    def is_root(self, v: Root) -> bool:
        return v in self._index or tuple(-c for c in v) in self._index

    @staticmethod
    def height(root: Root) -> int:
        return sum(root)

    def pairing(self, beta: Root, i: int) -> int:
        """beta(h_i) for the i-th simple coroot."""
        return sum(beta[j] * self.cartan_matrix[i][j] for j in range(self.rank))

    def dot(self, u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
        """Inner product of two h* vectors given in simple-root coordinates."""
        l = self.rank
        total = Fraction(0)
        for i in range(l):
            if not u[i]:
                continue
            for j in range(l):
                if v[j]:
                    total += u[i] * self.norms[i] * self.cartan_matrix[i][j] * v[j]
        return total

    def half_norm(self, root: Root) -> Fraction:
        """(root, root) / 2."""
        return self.dot(root, root) / 2

    def coroot(self, root: Root) -> Tuple[int, ...]:
        """Coefficients of h_root over the simple coroots h_i (always integers)."""
        d_b = self.half_norm(root)
        out = []
        for i in range(self.rank):
            c = root[i] * self.norms[i] / d_b
            assert c.denominator == 1
            out.append(int(c))
        return tuple(out)


def build_root_system(lt: LieType) -> RootSystem:
    """Close the simple roots under root-string addition.

    A candidate beta + alpha_i is a root iff p - beta(h_i) > 0 where p is
    the number of times alpha_i can be subtracted from beta staying inside
    the root system.  Heights grow by one per round, so the scan below is
    exhaustive.
    """
    M, d = _cartan_and_norms(lt)
    l = lt.rank
    simple = [tuple(1 if j == i else 0 for j in range(l)) for i in range(l)]
    known = set(simple)
    layers: List[List[Root]] = [sorted(simple)]
    while True:
        frontier = layers[-1]
        nxt = set()
        for beta in frontier:
            for i in range(l):
                if beta == simple[i]:
                    continue  # 2*alpha_i is never a root
                p = 0
                while True:
                    down = tuple(beta[j] - (p + 1) * simple[i][j] for j in range(l))
                    if down in known or tuple(-c for c in down) in known:
                        p += 1
                    else:
                        break
                pairing = sum(beta[j] * M[i][j] for j in range(l))
                if p - pairing > 0:
                    nxt.add(tuple(beta[j] + simple[i][j] for j in range(l)))
        if not nxt:
            break
        layer = sorted(nxt)
        layers.append(layer)
        known.update(layer)

    positive = tuple(r for layer in layers for r in layer)
    index = {r: k for k, r in enumerate(positive)}
    rs = RootSystem(
        type=lt,
        cartan_matrix=tuple(tuple(row) for row in M),
        norms=tuple(d),
        positive_roots=positive,
        _index=index,
    )
    assert len(layers[-1]) == 1, "highest root is not unique"
    assert 2 * len(positive) + l == lt.dim
    return rs


def exponents(rs: RootSystem) -> List[int]:
    """Exponents m_1 <= ... <= m_l read off the height histogram.

    Row k of the height array holds the roots of height k, filled from the
    right; the column lengths, left to right, are the exponents.
    """
    l = rs.rank
    counts: Dict[int, int] = {}
    for r in rs.positive_roots:
        counts[rs.height(r)] = counts.get(rs.height(r), 0) + 1
    heights = [counts.get(k, 0) for k in range(1, rs.height(rs.highest_root) + 1)]
    return [sum(1 for n in heights if n >= l + 1 - j) for j in range(1, l + 1)]


def coxeter_number(rs: RootSystem) -> int:
    return rs.height(rs.highest_root) + 1


def x_coefficients(rs: RootSystem) -> Tuple[Fraction, ...]:
    """Coefficients r_i of the grading element x = (1/2) sum of all positive coroots.

    x satisfies alpha_i(x) = 1 for every simple root, which the caller may
    verify via ``rs.pairing``; the r_i are the reality constants used by the
    Toda layer.
    """
    l = rs.rank
    acc = [Fraction(0)] * l
    for root in rs.positive_roots:
        co = rs.coroot(root)
        for i in range(l):
            acc[i] += co[i]
    return tuple(c / 2 for c in acc)


@dataclass(frozen=True)
class AffineCartanData:
    gcm: Tuple[Tuple[int, ...], ...]  # (l+1) x (l+1), node 0 first
    marks: Tuple[int, ...]
    comarks: Tuple[int, ...]
    kac_label: str


def _integer_null_vector(mat: Sequence[Sequence[int]]) -> Tuple[int, ...]:
    """The (unique up to scale) kernel vector of an affine GCM, scaled to
    coprime positive integers."""
    n = len(mat)
    rows = [[Fraction(x) for x in row] for row in mat]
    piv_cols: List[int] = []
    r = 0
    for c in range(n):
        piv = next((k for k in range(r, n) if rows[k][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][c]
        rows[r] = [x / inv for x in rows[r]]
        for k in range(n):
            if k != r and rows[k][c] != 0:
                f = rows[k][c]
                rows[k] = [a - f * b for a, b in zip(rows[k], rows[r])]
        piv_cols.append(c)
        r += 1
    free = [c for c in range(n) if c not in piv_cols]
    if len(free) != 1:
        raise ValueError(f"kernel dimension {len(free)} != 1; matrix is not affine")
    fc = free[0]
    vec = [Fraction(0)] * n
    vec[fc] = Fraction(1)
    for rr, c in enumerate(piv_cols):
        vec[c] = -rows[rr][fc]
    denom = 1
    for x in vec:
        denom = denom * x.denominator // gcd(denom, x.denominator)
    ints = [int(x * denom) for x in vec]
    g = 0
    for x in ints:
        g = gcd(g, x)
    ints = [x // g for x in ints]
    if any(x <= 0 for x in ints):
        ints = [-x for x in ints]
    if any(x <= 0 for x in ints):
        raise ValueError("kernel vector is not positive; matrix is not affine")
    return tuple(ints)


def affine_cartan(rs: RootSystem) -> AffineCartanData:
    """Extend the Cartan matrix by the lowered highest root (node 0)."""
    l = rs.rank
    delta = rs.highest_root
    dd = rs.half_norm(delta)

    def entry(i: int, j: int) -> int:
        # alpha_j(h_i) with index 0 denoting (-delta, h_{-delta})
        a_j = [Fraction(-c) for c in delta] if j == 0 else None
        if i == 0:
            if j == 0:
                return 2
            num = -rs.dot(rs.simple_root(j - 1), delta) / dd
            assert num.denominator == 1
            return int(num)
        if j == 0:
            return -rs.pairing(delta, i - 1)
        return rs.cartan_matrix[i - 1][j - 1]

    gcm = tuple(tuple(entry(i, j) for j in range(l + 1)) for i in range(l + 1))
    marks = _integer_null_vector(gcm)
    comarks = _integer_null_vector([[gcm[j][i] for j in range(l + 1)] for i in range(l + 1)])
    assert all(
        sum(gcm[i][j] * marks[j] for j in range(l + 1)) == 0 for i in range(l + 1)
    )
    assert all(
        sum(comarks[i] * gcm[i][j] for i in range(l + 1)) == 0 for j in range(l + 1)
    )
    label = f"{rs.type.family}{rs.type.rank}(1)"
    return AffineCartanData(gcm=gcm, marks=marks, comarks=comarks, kac_label=label)


@dataclass(frozen=True)
class DiagramAutomorphism:
    """Order <= 2 symmetry of the Dynkin graph acting on simple-root indices."""

    perm: Tuple[int, ...]  # 0-based image of each node
    order: int

    @property
    def is_identity(self) -> bool:
        return self.order == 1

    def apply_index(self, i: int) -> int:
        return self.perm[i]

    def apply_root(self, root: Root) -> Root:
        out = [0] * len(root)
        for i, c in enumerate(root):
            out[self.perm[i]] = c
        return tuple(out)


def diagram_automorphism(rs: RootSystem) -> DiagramAutomorphism:
    """The graph symmetry entering the split-form involution.

    Nontrivial (order 2) exactly for A_n (n >= 2), D_odd and E6; identity
    for every other supported type.
    """
    l = rs.rank
    fam = rs.type.family
    perm = list(range(l))
    if fam == "A" and l >= 2:
        perm = [l - 1 - i for i in range(l)]
    elif fam == "D" and l % 2 == 1:
        perm[l - 2], perm[l - 1] = perm[l - 1], perm[l - 2]
    elif fam == "E" and l == 6:
        perm = [4, 3, 2, 1, 0, 5]
    order = 1 if perm == list(range(l)) else 2
    nu = DiagramAutomorphism(perm=tuple(perm), order=order)
    A = rs.cartan_matrix
    for i in range(l):
        for j in range(l):
            assert A[nu.perm[i]][nu.perm[j]] == A[i][j], "graph symmetry check failed"
    assert nu.apply_root(rs.highest_root) == rs.highest_root
    return nu
