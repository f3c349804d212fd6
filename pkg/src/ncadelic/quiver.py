"""Cyclic-quiver data (B1, B2, I, J) for Gamma = mu_m.

V = sum_i V_i and W = sum_i W_i are graded by characters eps^i.  Blocks:
B1: V_i -> V_{i-1}, B2: V_i -> V_{i+1}, I: W_i -> V_i, J: V_i -> W_i, so the
off-pattern blocks simply do not exist.  The moment map equation is
[B1, B2] + IJ = tau|_V with tau acting on V_i by chi_i(tau).
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass

from gmpy2 import mpq

from . import linalg
from .linalg import Echelon, mat_add, mat_identity, mat_inverse, mat_is_zero, mat_mul, mat_sub, mat_zero
from .scalars import GroupAlgElem, random_rational, scalar_from_json, scalar_to_json


@dataclass(frozen=True)
class GammaModule:
    """Multiplicities of the characters eps^0, ..., eps^(m-1)."""

    dims: tuple

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if any(d < 0 for d in self.dims):
            raise ValueError("negative multiplicity")

    @property
    def m(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return sum(self.dims)

    def offsets(self) -> list:
        out, acc = [], 0
        for d in self.dims:
            out.append(acc)
            acc += d
        return out

    def character_of(self, index: int) -> int:
        """Character label of the index-th basis vector of the flattened module."""
        for i, off in enumerate(self.offsets()):
            if off <= index < off + self.dims[i]:
                return i
        raise IndexError(index)

    def __getitem__(self, i):
        return self.dims[i % self.m]


class QuiverData:
    """Immutable block data; entries are exact scalars."""

    def __init__(self, tau: GroupAlgElem, V: GammaModule, W: GammaModule, B1, B2, I, J):
        m = tau.m
        if V.m != m or W.m != m:
            raise ValueError("dimension vectors must have length m")
        self.tau, self.V, self.W = tau, V, W
        self.m = m
        self.B1 = [self._block(B1[i], V[i - 1], V[i], "B1", i) for i in range(m)]
        self.B2 = [self._block(B2[i], V[i + 1], V[i], "B2", i) for i in range(m)]
        self.I = [self._block(I[i], V[i], W[i], "I", i) for i in range(m)]
        self.J = [self._block(J[i], W[i], V[i], "J", i) for i in range(m)]

    @staticmethod
    def _block(M, rows, cols, name, i):
        M = [[mpq(v) if isinstance(v, int) else v for v in r] for r in M] if M else []
        if rows == 0:
            return []
        if len(M) != rows or any(len(r) != cols for r in M):
            raise ValueError(f"{name}[{i}] must be {rows}x{cols}")
        return M

    @property
    def n(self) -> int:
        return self.V.total

    @property
    def r(self) -> int:
        return self.W.total

    # -- full (flattened) matrices --------------------------------------------
    def full(self, name: str) -> list:
        """Flatten a block family to a matrix on V (or between V and W)."""
        m = self.m
        offV, offW = self.V.offsets(), self.W.offsets()
        if name in ("B1", "B2"):
            M = mat_zero(self.n, self.n)
            shift = -1 if name == "B1" else 1
            blocks = self.B1 if name == "B1" else self.B2
            for i in range(m):
                tgt = (i + shift) % m
                for a, row in enumerate(blocks[i]):
                    for b, v in enumerate(row):
                        M[offV[tgt] + a][offV[i] + b] = v
            return M
        if name == "I":
            M = mat_zero(self.n, self.r)
            for i in range(m):
                for a, row in enumerate(self.I[i]):
                    for b, v in enumerate(row):
                        M[offV[i] + a][offW[i] + b] = v
            return M
        if name == "J":
            M = mat_zero(self.r, self.n)
            for i in range(m):
                for a, row in enumerate(self.J[i]):
                    for b, v in enumerate(row):
                        M[offW[i] + a][offV[i] + b] = v
            return M
        raise KeyError(name)

    def tau_on_V(self) -> list:
        M = mat_zero(self.n, self.n)
        for idx in range(self.n):
            M[idx][idx] = self.tau.char_value(self.V.character_of(idx))
        return M

    def to_json(self) -> dict:
        def blocks(bs):
            return [[[scalar_to_json(v) for v in r] for r in b] for b in bs]
        return {
            "m": self.m, "tau": self.tau.to_json(), "dimsV": list(self.V.dims), "dimsW": list(self.W.dims),
            "B1": blocks(self.B1), "B2": blocks(self.B2), "I": blocks(self.I), "J": blocks(self.J),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "QuiverData":
        def blocks(bs):
            return [[[scalar_from_json(v) for v in r] for r in b] for b in bs]
        tau = GroupAlgElem.from_json(obj["tau"])
        if tau.m != obj["m"]:
            raise ValueError("tau and m disagree")
        return cls(tau, GammaModule(obj["dimsV"]), GammaModule(obj["dimsW"]),
                   blocks(obj["B1"]), blocks(obj["B2"]), blocks(obj["I"]), blocks(obj["J"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def __eq__(self, other):
        return isinstance(other, QuiverData) and self.to_json() == other.to_json()


def moment_defect(d: QuiverData) -> list:
    """[B1,B2] + IJ - tau|_V as a full n x n matrix."""
    B1, B2 = d.full("B1"), d.full("B2")
    n = d.n
    comm = mat_sub(mat_mul(B1, B2, inner=n), mat_mul(B2, B1, inner=n))
    IJ = mat_mul(d.full("I"), d.full("J"), inner=d.r)
    return mat_sub(mat_add(comm, IJ), d.tau_on_V())


def is_admissible(d: QuiverData) -> bool:
    return mat_is_zero(moment_defect(d))


def is_stable(d: QuiverData):
    """(stable?, witness).  The witness is a basis of the smallest subspace
    containing im(I) and closed under B1, B2 whenever that is proper."""
    n = d.n
    if n == 0:
        return True, []
    ops = [linalg.matrix_to_images(d.full("B1")), linalg.matrix_to_images(d.full("B2"))]
    I = d.full("I")
    span = Echelon()
    queue = [{a: I[a][b] for a in range(n) if I[a][b] != 0} for b in range(d.r)]
    while queue:
        v = queue.pop()
        if span.contains(v):
            continue
        span.add(v)
        for images in ops:
            queue.append(linalg.apply_map(images, v))
    if span.dim == n:
        return True, []
    return False, span.basis()


def gauge_apply(g: list, d: QuiverData) -> QuiverData:
    """g . (B1, B2, I, J) = (g B1 g^-1, g B2 g^-1, g I, J g^-1) with g = (g_i)."""
    m = d.m
    ginv = []
    for i in range(m):
        if d.V[i]:
            try:
                ginv.append(mat_inverse(g[i]))
            except ZeroDivisionError:
                raise ValueError(f"gauge block {i} is singular") from None
        else:
            ginv.append([])
    V = d.V

    def conj(left, M, right, rows, mid, cols):
        if rows == 0 or cols == 0:
            return [[mpq(0)] * cols for _ in range(rows)]
        return mat_mul(mat_mul(left, M, inner=mid), right, inner=cols)

    B1 = [conj(g[(i - 1) % m], d.B1[i], ginv[i], V[i - 1], V[i - 1], V[i]) for i in range(m)]
    B2 = [conj(g[(i + 1) % m], d.B2[i], ginv[i], V[i + 1], V[i + 1], V[i]) for i in range(m)]
    I = [mat_mul(g[i], d.I[i], inner=V[i]) if V[i] else [] for i in range(m)]
    J = [mat_mul(d.J[i], ginv[i], inner=V[i]) if d.W[i] else [] for i in range(m)]
    return QuiverData(d.tau, d.V, d.W, B1, B2, I, J)


def random_gauge(d: QuiverData, rng: random.Random) -> list:
    g = []
    for i in range(d.m):
        k = d.V[i]
        while True:
            M = [[random_rational(rng, -3, 3, 2) for _ in range(k)] for _ in range(k)]
            if k == 0 or linalg.mat_rank(M) == k:
                g.append(M)
                break
    return g


def stabilizer_dimension(d: QuiverData) -> int:
    """Dimension of {h : h B = B h, h I = 0, J h = 0} (block-diagonal h).

    The stabilizer of d in the gauge group is Id + (this space) intersected
    with invertibles, so a zero answer means the action is free at d.
    """
    m, V = d.m, d.V
    unknowns = [(i, a, b) for i in range(m) for a in range(V[i]) for b in range(V[i])]
    index = {u: t for t, u in enumerate(unknowns)}
    equations: list = []  # each: {unknown index: coefficient}

    # h_{i-1} B1_i - B1_i h_i = 0 ; h_{i+1} B2_i - B2_i h_i = 0
    for blocks, shift in ((d.B1, -1), (d.B2, 1)):
        for i in range(m):
            t = (i + shift) % m
            M = blocks[i]
            for a in range(V[t]):
                for b in range(V[i]):
                    eq: dict = {}
                    for c in range(V[t]):
                        if M[c][b] != 0:
                            linalg.vec_iadd(eq, {index[(t, a, c)]: M[c][b]})
                    for c in range(V[i]):
                        if M[a][c] != 0:
                            linalg.vec_iadd(eq, {index[(i, c, b)]: -M[a][c]})
                    equations.append(eq)
    for i in range(m):
        for a in range(V[i]):
            for b in range(d.W[i]):
                eq = {}
                for c in range(V[i]):
                    if d.I[i][c][b] != 0:
                        linalg.vec_iadd(eq, {index[(i, a, c)]: d.I[i][c][b]})
                equations.append(eq)
        for a in range(d.W[i]):
            for b in range(V[i]):
                eq = {}
                for c in range(V[i]):
                    if d.J[i][a][c] != 0:
                        linalg.vec_iadd(eq, {index[(i, c, b)]: d.J[i][a][c]})
                equations.append(eq)
    return len(unknowns) - linalg.rank([e for e in equations if e])


def fingerprints(d: QuiverData, max_len: int = 6) -> dict:
    """Gauge invariants: tr(word) for closed words in B1, B2 and the entries of
    J_i word I_i for words returning to V_i."""
    out: dict = {}
    n, m = d.n, d.m
    if n == 0:
        return out
    mats = {"1": d.full("B1"), "2": d.full("B2")}
    I, J = d.full("I"), d.full("J")
    words = {"": mat_identity(n)}
    for length in range(1, max_len + 1):
        new = {}
        for w, M in words.items():
            if len(w) != length - 1:
                continue
            for c, A in mats.items():
                new[c + w] = mat_mul(A, M, inner=n)
        words.update(new)
    for w, M in words.items():
        if (w.count("1") - w.count("2")) % m:
            continue
        if w:
            out["tr:" + w] = scalar_to_json(sum((M[i][i] for i in range(n)), mpq(0)))
        JMI = mat_mul(mat_mul(J, M, inner=n), I, inner=n) if d.r else []
        out["JwI:" + w] = [[scalar_to_json(v) for v in r] for r in JMI]
    return out


# -- generators ------------------------------------------------------------------


def generate_cm(n: int, tau, rng: random.Random | None = None) -> QuiverData:
    """m = 1 Calogero-Moser data X = diag(x_i), Z_ij = tau/(x_j - x_i),
    I = all ones, J = tau * all ones.

    With [X, Z]_ij = (x_i - x_j) Z_ij = -tau off the diagonal, the moment
    equation [X,Z] + IJ = tau leaves the rank-one matrix tau * ones for IJ.
    """
    tau = mpq(tau) if not isinstance(tau, GroupAlgElem) else tau.charvals[0]
    if n < 1:
        raise ValueError("n must be positive")
    if tau == 0:
        raise ValueError("tau must be nonzero")
    rng = rng or random.Random(0)
    xs: list = []
    while len(xs) < n:
        v = random_rational(rng, -6, 6, 2)
        if v not in xs:
            xs.append(v)
    if n <= 2:
        xs = [mpq(i) for i in range(n)]
    X = [[xs[i] if i == j else mpq(0) for j in range(n)] for i in range(n)]
    Z = [[tau / (xs[j] - xs[i]) if i != j else random_rational(rng, -3, 3, 2) for j in range(n)] for i in range(n)]
    if n == 1:
        Z = [[random_rational(rng, -3, 3, 2)]]
    I = [[mpq(1)] for _ in range(n)]
    J = [[tau] * n]
    t = GroupAlgElem(1, [tau])
    return QuiverData(t, GammaModule((n,)), GammaModule((1,)), [X], [Z], [I], [J])


class GenerationFailure(RuntimeError):
    pass


def generate_cyclic(dims_V, dims_W, tau: GroupAlgElem, rng: random.Random | None = None,
                    attempts: int = 50) -> QuiverData:
    """Random admissible stable data: sample B1 and I, then solve the
    moment equation (affine-linear in B2, J) and pick a random solution."""
    rng = rng or random.Random(0)
    V, W = GammaModule(dims_V), GammaModule(dims_W)
    m = tau.m
    if V.total == 0:
        J = [[[] for _ in range(W[i])] for i in range(m)]
        return QuiverData(tau, V, W, [[]] * m, [[]] * m, [[]] * m, J)
    for _ in range(attempts):
        B1 = [[[random_rational(rng, -3, 3, 1) for _ in range(V[i])] for _ in range(V[i - 1])] for i in range(m)]
        I = [[[random_rational(rng, -3, 3, 1) for _ in range(W[i])] for _ in range(V[i])] for i in range(m)]
        unknowns = [("B2", i, a, b) for i in range(m) for a in range(V[i + 1]) for b in range(V[i])]
        unknowns += [("J", i, a, b) for i in range(m) for a in range(W[i]) for b in range(V[i])]
        index = {u: t for t, u in enumerate(unknowns)}
        rows, rhs = [], []
        for i in range(m):
            # (B1_{i+1} B2_i - B2_{i-1} B1_i + I_i J_i)[a][b] = chi_i(tau) delta_ab on V_i
            for a in range(V[i]):
                for b in range(V[i]):
                    eq: dict = {}
                    for c in range(V[i + 1]):
                        coef = B1[(i + 1) % m][a][c]
                        if coef != 0:
                            linalg.vec_iadd(eq, {index[("B2", i, c, b)]: coef})
                    for c in range(V[i - 1]):
                        coef = B1[i][c][b]
                        if coef != 0:
                            linalg.vec_iadd(eq, {index[("B2", (i - 1) % m, a, c)]: -coef})
                    for c in range(W[i]):
                        coef = I[i][a][c]
                        if coef != 0:
                            linalg.vec_iadd(eq, {index[("J", i, c, b)]: coef})
                    rows.append(eq)
                    rhs.append(tau.char_value(i) if a == b else mpq(0))
        sol = _solve_affine(rows, rhs, len(unknowns), rng)
        if sol is None:
            continue
        B2 = [[[sol[index[("B2", i, a, b)]] for b in range(V[i])] for a in range(V[i + 1])] for i in range(m)]
        J = [[[sol[index[("J", i, a, b)]] for b in range(V[i])] for a in range(W[i])] for i in range(m)]
        d = QuiverData(tau, V, W, B1, B2, I, J)
        if is_admissible(d) and is_stable(d)[0]:
            return d
    raise GenerationFailure(f"no admissible stable data for V={V.dims}, W={W.dims} after {attempts} attempts")


def _solve_affine(rows: list, rhs: list, nunk: int, rng: random.Random):
    """A random solution of sum_u rows[e][u] s_u = rhs[e], or None."""
    # transpose to column images indexed by equation, then solve
    columns = [dict() for _ in range(nunk)]
    for e, row in enumerate(rows):
        for u, c in row.items():
            columns[u][e] = c
    target = {e: v for e, v in enumerate(rhs) if v != 0}
    particular = linalg.solve(columns, target)
    if particular is None:
        return None
    sol = [particular.get(u, mpq(0)) for u in range(nunk)]
    for kv in linalg.kernel(columns):
        c = random_rational(rng, -2, 2, 1)
        for u, v in kv.items():
            sol[u] = sol[u] + c * v
    return sol


def trivial_instance(tau_value=1) -> QuiverData:
    """m = 1, n = 1, r = 1: B1 = B2 = 0, I = 1, J = tau."""
    t = mpq(tau_value)
    return QuiverData(GroupAlgElem(1, [t]), GammaModule((1,)), GammaModule((1,)),
                      [[[mpq(0)]]], [[[mpq(0)]]], [[[mpq(1)]]], [[[t]]])
