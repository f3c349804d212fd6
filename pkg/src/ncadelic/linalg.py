"""Sparse exact linear algebra over Q or Q(zeta_m).

Vectors are dictionaries ``{index: nonzero scalar}``; indices are any hashable,
totally ordered keys (ints or tuples).  Linear maps are given by the list of
images of the source basis vectors.  Every routine is pure Gaussian
elimination with exact arithmetic, so results are canonical.
"""
from __future__ import annotations

from typing import Hashable, Iterable, Sequence

from gmpy2 import mpq

Vec = dict


def vec_add(u: Vec, v: Vec, c=1) -> Vec:
    """u + c*v as a new vector."""
    out = dict(u)
    for k, val in v.items():
        nv = out.get(k, 0) + c * val
        if nv == 0:
            out.pop(k, None)
        else:
            out[k] = nv
    return out


def vec_iadd(u: Vec, v: Vec, c=1) -> None:
    """In place u += c*v."""
    for k, val in v.items():
        nv = u.get(k, 0) + c * val
        if nv == 0:
            u.pop(k, None)
        else:
            u[k] = nv


def vec_scale(v: Vec, c) -> Vec:
    if c == 0:
        return {}
    return {k: c * val for k, val in v.items()}


def vec_clean(v: Vec) -> Vec:
    return {k: val for k, val in v.items() if val != 0}


class Echelon:
    """A subspace held in fully reduced row echelon form.

    Each stored row has a pivot (its smallest index), the pivot entry is 1 and
    every other row vanishes at that pivot.  With ``track=True`` each row also
    carries the combination of inserted vectors that produced it, which is how
    kernels and solutions are read off.
    """

    def __init__(self, vectors: Iterable[Vec] = (), track: bool = False):
        self.rows: dict = {}  # pivot -> row
        self.combos: dict = {}  # pivot -> combination (only when tracking)
        self.track = track
        self._count = 0
        for v in vectors:
            self.add(v)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def dim(self) -> int:
        return len(self.rows)

    def reduce(self, v: Vec, combo: Vec | None = None):
        """Return v minus its projection along stored rows (and updated combo)."""
        v = dict(v)
        hits = [p for p in v if p in self.rows]
        for p in hits:
            c = v.get(p)
            if c is None or c == 0:
                continue
            vec_iadd(v, self.rows[p], -c)
            if combo is not None:
                vec_iadd(combo, self.combos[p], -c)
        return v, combo

    def add(self, v: Vec, label: Hashable | None = None):
        """Insert v.  Returns ``None`` if v was independent, else (when tracking)
        the kernel combination it produced."""
        if label is None:
            label = self._count
        self._count += 1
        combo = {label: mpq(1)} if self.track else None
        r, combo = self.reduce(v, combo)
        if not r:
            return combo if self.track else False
        piv = min(r)
        inv = 1 / r[piv]
        if inv != 1:
            r = {k: val * inv for k, val in r.items()}
            if combo is not None:
                combo = {k: val * inv for k, val in combo.items()}
        for p, row in self.rows.items():
            c = row.get(piv)
            if c is not None:
                vec_iadd(row, r, -c)
                if self.track:
                    vec_iadd(self.combos[p], combo, -c)
        self.rows[piv] = r
        if self.track:
            self.combos[piv] = combo
        return None

    def contains(self, v: Vec) -> bool:
        r, _ = self.reduce(v)
        return not r

    def contains_all(self, vectors: Iterable[Vec]) -> bool:
        return all(self.contains(v) for v in vectors)

    def basis(self) -> list:
        return [self.rows[p] for p in sorted(self.rows)]

    def pivots(self) -> list:
        return sorted(self.rows)

    def copy(self) -> "Echelon":
        e = Echelon(track=False)
        e.rows = {p: dict(r) for p, r in self.rows.items()}
        return e

    def equals(self, other: "Echelon") -> bool:
        if self.dim != other.dim:
            return False
        return all(self.rows.get(p) == r for p, r in other.rows.items())

    def __repr__(self):
        return f"Echelon(dim={self.dim})"


def span(vectors: Iterable[Vec]) -> Echelon:
    return Echelon(vectors)


def rank(images: Sequence[Vec]) -> int:
    return Echelon(images).dim


def kernel(images: Sequence[Vec]) -> list:
    """Basis of the kernel of the map e_i -> images[i], as vectors indexed by i."""
    ech = Echelon(track=True)
    out = []
    for i, v in enumerate(images):
        combo = ech.add(v, label=i)
        if combo is not None and combo is not False:
            out.append(combo)
    return out


def solve(images: Sequence[Vec], target: Vec):
    """Return a combination c (indexed by i) with sum c_i images[i] = target, or None."""
    ech = Echelon(track=True)
    for i, v in enumerate(images):
        ech.add(v, label=i)
    r, combo = ech.reduce(target, {})
    if r:
        return None
    return {k: -v for k, v in combo.items() if v != 0}


def apply_map(images: Sequence[Vec], coeffs: Vec) -> Vec:
    out: Vec = {}
    for i, c in coeffs.items():
        vec_iadd(out, images[i], c)
    return out


def intersect(a: Echelon, b: Echelon) -> Echelon:
    """Intersection of two subspaces (Zassenhaus-free: kernel of [A | -B])."""
    abasis = a.basis()
    bbasis = b.basis()
    images = list(abasis) + [vec_scale(v, -1) for v in bbasis]
    out = Echelon()
    for combo in kernel(images):
        vec: Vec = {}
        for i, c in combo.items():
            if i < len(abasis):
                vec_iadd(vec, abasis[i], c)
        out.add(vec)
    return out


def subspace_sum(*spaces: Echelon) -> Echelon:
    out = Echelon()
    for s in spaces:
        for v in s.basis():
            out.add(v)
    return out


def image_of(vectors: Iterable[Vec], op) -> Echelon:
    """Span of op(v) over the given vectors."""
    return Echelon(op(v) for v in vectors)


def project(v: Vec, keep) -> Vec:
    """Restrict a vector to the coordinates satisfying the predicate ``keep``."""
    return {k: val for k, val in v.items() if keep(k)}


def restrict_to_coordinates(space: Echelon, allowed) -> Echelon:
    """Subspace of vectors in ``space`` supported on coordinates in ``allowed``.

    ``allowed`` is a predicate on indices.  Computed as the kernel of the
    projection onto the complementary coordinates.
    """
    basis = space.basis()
    images = [project(v, lambda k: not allowed(k)) for v in basis]
    out = Echelon()
    for combo in kernel(images):
        vec: Vec = {}
        for i, c in combo.items():
            vec_iadd(vec, basis[i], c)
        out.add(vec)
    return out


def quotient_rank(images: Sequence[Vec], modulo: Echelon) -> int:
    """Rank of the composite with the projection to (target / modulo)."""
    e = modulo.copy()
    base = e.dim
    for v in images:
        e.add(v)
    return e.dim - base


def matrix_to_images(rows: Sequence[Sequence]) -> list:
    """Dense row-major matrix -> list of sparse column images."""
    if not rows:
        return []
    ncols = len(rows[0])
    out = []
    for j in range(ncols):
        out.append({i: r[j] for i, r in enumerate(rows) if r[j] != 0})
    return out


# -- small dense matrices (lists of rows) over exact scalars --------------------


def mat_zero(rows: int, cols: int) -> list:
    return [[mpq(0)] * cols for _ in range(rows)]


def mat_identity(n: int, c=1) -> list:
    return [[mpq(c) if i == j else mpq(0) for j in range(n)] for i in range(n)]


def mat_shape(A) -> tuple:
    return (len(A), len(A[0]) if A else 0)


def mat_mul(A, B, inner: int | None = None) -> list:
    """A @ B.  ``inner`` gives the contracted size when A has no rows."""
    rows = len(A)
    k = len(A[0]) if A else (inner if inner is not None else len(B))
    cols = len(B[0]) if B else 0
    if rows and k != len(B):
        raise ValueError(f"shape mismatch {len(A)}x{k} @ {len(B)}x{cols}")
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = mpq(0)
            for t in range(k):
                a = A[i][t]
                if a != 0:
                    b = B[t][j]
                    if b != 0:
                        acc = acc + a * b
            row.append(acc)
        out.append(row)
    return out


def mat_add(A, B, c=1) -> list:
    return [[a + c * b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A, B) -> list:
    return mat_add(A, B, -1)


def mat_scale(A, c) -> list:
    return [[c * a for a in r] for r in A]


def mat_is_zero(A) -> bool:
    return all(a == 0 for r in A for a in r)


def mat_rank(A) -> int:
    return rank([{j: a for j, a in enumerate(r) if a != 0} for r in A])


def mat_inverse(A) -> list:
    """Gauss-Jordan inverse; raises ZeroDivisionError for singular input."""
    n = len(A)
    M = [list(r) + [mpq(1) if i == j else mpq(0) for j in range(n)] for i, r in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                c = M[r][col]
                M[r] = [a - c * b for a, b in zip(M[r], M[col])]
    return [r[n:] for r in M]
