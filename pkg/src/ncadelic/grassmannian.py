"""Finite models of adelic points and fat B-submodules; De Rham, Diff, Symbol.

Fix a monic polynomial p(x) of degree d whose terms all have degree = d mod m
(a Gamma-semi-invariant, e.g. a product of x and factors x^m - c).  Then

* an adelic point U with p W_0 <= U <= (1/p) W_0, W_0 = W (x)_Gamma CG[x], is
  stored as p U / p^2 W_0 inside X_0 = W_0 / p^2 W_0, with basis (s, a),
  a < 2d, standing for w_s (x) x^a e_{c_s - a};
* a fat module p W(x)B <= N <= (1/p) W(x)B is stored as p N / p^2 (W(x)B)
  inside X = (W (x)_Gamma B) / p^2 (W (x)_Gamma B), basis (s, a, b) standing
  for w_s (x) x^a y^b e_{c_s - a + b}, truncated at y-degree K.

Here c_s is the character of the s-th basis vector of W.  Everything acts on
the right: the B-module structure of X and the CG[x]-module structure of X_0.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

import sympy
from gmpy2 import mpq

from . import linalg
from .btau import BAlgebra
from .linalg import Echelon
from .quiver import GammaModule, QuiverData, is_admissible, is_stable
from .scalars import (
    ONE,
    ZERO,
    CycScalar,
    GroupAlgElem,
    is_generic,
    random_generic_tau,
    random_rational,
    rational_to_str,
    scalar_from_json,
    scalar_to_json,
    zeta_power,
)


class UnsupportedField(ValueError):
    """The roots of p do not lie in Q(zeta_m)."""


class NotStabilized(RuntimeError):
    pass


class RoundtripFailure(RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message + " (increase bounds)")
        self.diagnostics = diagnostics or {}


# -- polynomials in x (coefficient lists, low degree first) ---------------------


def poly_mul(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai != 0:
            for j, bj in enumerate(b):
                out[i + j] = out[i + j] + ai * bj
    return out


def poly_pow(a: list, e: int) -> list:
    out = [ONE]
    for _ in range(e):
        out = poly_mul(out, a)
    return out


def poly_trim(a: list) -> list:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_from_x_power_and_factors(s0: int, factors: list, m: int) -> list:
    """x^s0 * prod (x^m - c)^s for factors [(c, s), ...]."""
    out = [ZERO] * s0 + [ONE]
    for c, s in factors:
        base = [-mpq(c)] + [ZERO] * (m - 1) + [ONE]
        out = poly_mul(out, poly_pow(base, s))
    return out


def is_semi_invariant(p: list, m: int) -> bool:
    d = len(p) - 1
    return all(c == 0 or (d - i) % m == 0 for i, c in enumerate(p))


# -- frames ---------------------------------------------------------------------


class Frame:
    """The ambient models X_0 and X for given (tau, W, p)."""

    def __init__(self, tau: GroupAlgElem, W: GammaModule, p: list):
        p = poly_trim([mpq(c) if isinstance(c, int) else c for c in p])
        if not p or p[-1] != 1:
            raise ValueError("p must be monic")
        if not is_semi_invariant(p, tau.m):
            raise ValueError("p must be a Gamma-semi-invariant polynomial")
        self.tau, self.W, self.p = tau, W, p
        self.m = tau.m
        self.d = len(p) - 1
        self.p2 = poly_mul(p, p)
        self.alg = BAlgebra(tau)
        self.chars = [W.character_of(s) for s in range(W.total)]
        self._rem = [{0: ONE}] if self.d else []

    @property
    def r(self) -> int:
        return self.W.total

    @property
    def dim0(self) -> int:
        return 2 * self.d * self.r

    def rem(self, e: int) -> dict:
        """x^e mod p^2 as {degree: coefficient}."""
        if self.d == 0:
            return {}
        D = 2 * self.d
        while len(self._rem) <= e:
            prev = self._rem[-1]
            nxt: dict = {}
            for i, c in prev.items():
                if i + 1 < D:
                    nxt[i + 1] = nxt.get(i + 1, ZERO) + c
                else:  # x^D = -sum_{t<D} p2[t] x^t
                    for t in range(D):
                        if self.p2[t] != 0:
                            nxt[t] = nxt.get(t, ZERO) - c * self.p2[t]
            self._rem.append({i: c for i, c in nxt.items() if c != 0})
        return self._rem[e]

    def idem0(self, s: int, a: int) -> int:
        return (self.chars[s] - a) % self.m

    def idem(self, s: int, a: int, b: int) -> int:
        return (self.chars[s] - a + b) % self.m

    def basis0(self) -> list:
        return [(s, a) for s in range(self.r) for a in range(2 * self.d)]

    def basis(self, K: int) -> list:
        return [(s, a, b) for s in range(self.r) for a in range(2 * self.d) for b in range(K + 1)]

    # -- actions on X --------------------------------------------------------
    def right_monomial(self, vec: dict, c: int, dd: int, k: int) -> dict:
        """vec * (x^c y^dd e_k), exact (no truncation)."""
        out: dict = {}
        for (s, a, b), v in vec.items():
            j = self.idem(s, a, b)
            for (a2, b2, _), w in self.alg.monomial_product(a, b, j, c, dd, k).items():
                for i, rc in self.rem(a2).items():
                    key = (s, i, b2)
                    nv = out.get(key, ZERO) + v * w * rc
                    if nv == 0:
                        out.pop(key, None)
                    else:
                        out[key] = nv
        return out

    def right_x(self, vec: dict) -> dict:
        out: dict = {}
        for k in range(self.m):
            linalg.vec_iadd(out, self.right_monomial(vec, 1, 0, k))
        return out

    def right_y(self, vec: dict) -> dict:
        out: dict = {}
        for k in range(self.m):
            linalg.vec_iadd(out, self.right_monomial(vec, 0, 1, k))
        return out

    def right_idempotent(self, vec: dict, j: int) -> dict:
        return {key: v for key, v in vec.items() if self.idem(*key) == j % self.m}

    # -- actions on X_0 -------------------------------------------------------
    def right_x0(self, vec: dict) -> dict:
        out: dict = {}
        for (s, a), v in vec.items():
            for i, rc in self.rem(a + 1).items():
                linalg.vec_iadd(out, {(s, i): v * rc})
        return out

    def right_idempotent0(self, vec: dict, j: int) -> dict:
        return {key: v for key, v in vec.items() if self.idem0(*key) == j % self.m}

    def x_operator0(self) -> list:
        """Right multiplication by x on X_0, as images of basis0."""
        return [self.right_x0({b: ONE}) for b in self.basis0()]

    def project(self, vec: dict) -> dict:
        """pi: X -> X_0, killing every positive power of y."""
        return {(s, a): v for (s, a, b), v in vec.items() if b == 0}

    def p_lattice(self) -> Echelon:
        """p W_0 / p^2 W_0 inside X_0 (the image of the base point)."""
        return self.poly_lattice(self.p)

    def poly_lattice(self, f: list) -> Echelon:
        """f W_0 / p^2 W_0 for a semi-invariant f dividing p^2."""
        out = Echelon()
        for s in range(self.r):
            for i in range(2 * self.d):
                vec: dict = {}
                for t, c in enumerate(f):
                    if c != 0:
                        for e, rc in self.rem(i + t).items():
                            linalg.vec_iadd(vec, {(s, e): c * rc})
                out.add(vec)
        return out

    def full0(self) -> Echelon:
        return Echelon({b: ONE} for b in self.basis0())

    def to_json(self) -> dict:
        return {"m": self.m, "tau": self.tau.to_json(), "W": list(self.W.dims),
                "p": [scalar_to_json(c) for c in self.p]}


# -- adelic points and fat modules ----------------------------------------------


def _close(space: Echelon, vectors, ops) -> Echelon:
    """Smallest subspace containing space + vectors and stable under ops."""
    queue = list(vectors) + space.basis()
    out = Echelon()
    while queue:
        v = queue.pop()
        r, _ = out.reduce(v)
        if not r:
            continue
        out.add(r)
        for op in ops:
            queue.append(op(r))
    return out


@dataclass
class AdelicPoint:
    frame: Frame
    U: Echelon

    @property
    def dim(self) -> int:
        return self.U.dim

    def is_gamma_stable(self) -> bool:
        F = self.frame
        return all(self.U.contains(F.right_idempotent0(v, j)) for v in self.U.basis() for j in range(F.m))

    def to_json(self) -> dict:
        order = self.frame.basis0()
        rows = [[scalar_to_json(v.get(b, ZERO)) for b in order] for v in self.U.basis()]
        out = self.frame.to_json()
        out["U"] = rows
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "AdelicPoint":
        tau = GroupAlgElem.from_json(obj["tau"])
        F = Frame(tau, GammaModule(obj["W"]), [scalar_from_json(c) for c in obj["p"]])
        order = F.basis0()
        U = Echelon({b: scalar_from_json(c) for b, c in zip(order, row) if scalar_from_json(c) != 0}
                    for row in obj["U"])
        return cls(F, U)

    def equals(self, other: "AdelicPoint") -> bool:
        return self.frame.p == other.frame.p and self.U.equals(other.U)


@dataclass
class FatModuleModel:
    frame: Frame
    space: Echelon  # p N / p^2 (W (x) B) intersected with F_K
    K: int
    info: dict = field(default_factory=dict)

    def filtered(self, k: int) -> Echelon:
        return linalg.restrict_to_coordinates(self.space, lambda key: key[2] <= k)

    def equals(self, other: "FatModuleModel") -> bool:
        return self.K == other.K and self.space.equals(other.space)


def gamma_x_closure(F: Frame, vectors) -> Echelon:
    ops = [F.right_x] + [lambda v, j=j: F.right_idempotent(v, j) for j in range(F.m)]
    return _close(Echelon(), vectors, ops)


def fat_closure(F: Frame, generators: list, K: int, max_extra: int = 8) -> FatModuleModel:
    """Right B-submodule of X generated by ``generators``, intersected with F_K.

    Products are exact: the span T_L of all generator * (word with at most
    L - g0 letters y) is computed without truncation, and T_L cut to y <= K is
    taken once it is the same for three consecutive L.
    """
    gens = [linalg.vec_clean(g) for g in generators if g]
    g0 = max((b for g in gens for (_, _, b) in g), default=0)
    T = gamma_x_closure(F, gens)
    L = g0
    history = []
    while True:
        cut = linalg.restrict_to_coordinates(T, lambda key: key[2] <= K)
        history.append(cut)
        if L >= K and len(history) >= 3 and history[-1].equals(history[-2]) and history[-2].equals(history[-3]):
            full_dr = Echelon(F.project(v) for v in T.basis())
            cut_dr = Echelon(F.project(v) for v in cut.basis())
            return FatModuleModel(F, cut, K, {"closure_bound": L, "dr_stable": full_dr.equals(cut_dr)})
        if L > K + max_extra + g0:
            raise NotStabilized(f"fat closure did not stabilize up to y-degree {L}")
        T = gamma_x_closure(F, T.basis() + [F.right_y(v) for v in T.basis()])
        L += 1


def de_rham(N: FatModuleModel) -> AdelicPoint:
    """U = pi(N): the image in X_0 after killing positive powers of y."""
    F = N.frame
    U = Echelon(F.project(v) for v in N.space.basis())
    return AdelicPoint(F, U)


def y_power_on_x_power(tau: GroupAlgElem, b: int, k: int, j: int):
    """The scalar c with y^b . x^k e_j = c x^(k-b) e_j in CG[x] = B / B y."""
    if b > k:
        return ZERO
    c = ONE
    for i in range(b):
        w = ZERO
        for t in range(k - i):
            w = w + tau.char_value(j + t)
        c = c * w
    return c


def default_kmax(F: Frame, K: int) -> int:
    return 2 * F.d * F.m * (K + 1)


def diff(U: AdelicPoint, K: int, k_max: int | None = None) -> FatModuleModel:
    """Diff(U) within F_K(X): all u with pi(u x^k e_j) in U for k < k_max."""
    F = U.frame
    k_max = default_kmax(F, K) if k_max is None else k_max
    basis = F.basis(K)
    images = []
    for (s, a, b) in basis:
        j0 = F.idem(s, a, b)
        img: dict = {}
        for k in range(k_max):
            j = (j0 - k) % F.m
            c = y_power_on_x_power(F.tau, b, k, j)
            if c == 0:
                continue
            vec = {(s, i): c * rc for i, rc in F.rem(a + k - b).items()}
            red, _ = U.U.reduce(vec)
            for key, v in red.items():
                img[(k, key)] = v
        images.append(img)
    kern = linalg.kernel(images)
    space = Echelon({basis[i]: v for i, v in combo.items()} for combo in kern)
    return FatModuleModel(F, space, K, {"k_max": k_max})


def symbol(N: FatModuleModel) -> dict:
    """Leading y^k coefficients L_k of N cap F_k, k = 0..K, and the limit.

    The symbol of N is the base point W_0 exactly when the stable L equals
    p W_0 / p^2 W_0.
    """
    F = N.frame
    lattices = []
    for k in range(N.K + 1):
        part = N.filtered(k)
        L = Echelon({(s, a): v for (s, a, b), v in vec.items() if b == k} for vec in part.basis())
        lattices.append(L)
    dims = [L.dim for L in lattices]
    increasing = all(lattices[i + 1].contains_all(lattices[i].basis()) for i in range(len(lattices) - 1))
    stabilized = len(lattices) >= 2 and lattices[-1].equals(lattices[-2])
    stable = lattices[-1]
    return {
        "dims": dims,
        "increasing": increasing,
        "stabilized": stabilized,
        "lattice": stable,
        "is_base_point": stabilized and stable.equals(F.p_lattice()),
        "is_x_stable": all(stable.contains(F.right_x0(v)) for v in stable.basis()),
    }


# -- primary decomposability --------------------------------------------------------


def _to_sympy_poly(p: list):
    x = sympy.Symbol("x")
    coeffs = []
    for c in p:
        if isinstance(c, CycScalar):
            raise UnsupportedField("p must have rational coefficients")
        c = mpq(c)
        coeffs.append(sympy.Rational(int(c.numerator), int(c.denominator)))
    return sympy.Poly(list(reversed(coeffs)), x), x


def orbit_factorization(p: list, m: int):
    """p = x^s0 * prod_c (x^m - c)^s_c with rational c, or UnsupportedField."""
    P, x = _to_sympy_poly(p)
    s0 = 0
    while P.degree() > 0 and P.eval(0) == 0:
        P = sympy.Poly(sympy.quo(P.as_expr(), x), x)
        s0 += 1
    t = sympy.Symbol("t")
    if P.degree() % m:
        raise UnsupportedField("p / x^s0 is not a polynomial in x^m")
    coeffs = P.all_coeffs()[::-1]
    if any(c != 0 for i, c in enumerate(coeffs) if i % m):
        raise UnsupportedField("p / x^s0 is not a polynomial in x^m")
    G = sympy.Poly(sum(c * t ** (i // m) for i, c in enumerate(coeffs)), t)
    factors = []
    for fac, mult in sympy.factor_list(G)[1]:
        if fac.degree() != 1:
            raise UnsupportedField(f"factor {fac.as_expr()} of p(x^(1/m)) is not linear over Q")
        a1, a0 = fac.all_coeffs()
        factors.append((mpq(str(-a0 / a1)), int(mult)))
    return s0, sorted(factors)


def rational_mth_root(c, m: int):
    """A rational mu with mu^m = c, or None."""
    c = mpq(c)
    if c == 0:
        return mpq(0)
    sign = 1
    if c < 0:
        if m % 2 == 0:
            return None
        sign = -1
        c = -c
    num = sympy.integer_nthroot(int(c.numerator), m)
    den = sympy.integer_nthroot(int(c.denominator), m)
    if not (num[1] and den[1]):
        return None
    return sign * mpq(int(num[0]), int(den[0]))


def roots_with_multiplicity(p: list, m: int) -> list:
    """[(lambda, k)] for p = prod (x - lambda)^k with lambda in Q(zeta_m)."""
    s0, factors = orbit_factorization(p, m)
    out = []
    if s0:
        out.append((mpq(0), s0))
    for c, s in factors:
        mu = rational_mth_root(c, m)
        if mu is None:
            raise UnsupportedField(f"x^{m} = {c} has no roots in Q(zeta_{m}) of the supported form")
        for j in range(m):
            out.append((mu * zeta_power(m, j), s))
    return out


def _op_power_kernel(F: Frame, lam, power: int) -> Echelon:
    basis = F.basis0()
    images = [{b: ONE} for b in basis]
    for _ in range(power):
        images = [linalg.vec_add(F.right_x0(v), v, -lam) for v in images]
    return Echelon({basis[i]: c for i, c in combo.items()} for combo in linalg.kernel(images))


def root_blocks(F: Frame) -> list:
    """Generalized eigenspaces of right x on X_0, one per root of p."""
    return [(lam, _op_power_kernel(F, lam, 2 * k)) for lam, k in roots_with_multiplicity(F.p, F.m)]


def is_primary_decomposable(U: AdelicPoint):
    """(decomposable?, block dimensions): dim U = sum over roots of dim(U cap block)."""
    F = U.frame
    if F.d == 0:
        return True, []
    blocks = root_blocks(F)
    dims = []
    for lam, blk in blocks:
        dims.append((lam, linalg.intersect(U.U, blk).dim))
    total = sum(d for _, d in dims)
    return total == U.U.dim and U.is_gamma_stable(), dims


def _squarefree_part(p: list) -> list:
    P, x = _to_sympy_poly(p)
    g = sympy.gcd(P, P.diff(x))
    S = sympy.Poly(sympy.quo(P, g), x)
    S = S.monic()
    return [mpq(str(c)) for c in reversed(S.all_coeffs())]


def _mat_poly_eval(coeffs: list, A: list) -> list:
    n = len(A)
    out = linalg.mat_zero(n, n)
    for c in reversed(coeffs):
        out = linalg.mat_mul(out, A, inner=n)
        for i in range(n):
            out[i][i] = out[i][i] + c
    return out


def semisimple_part(F: Frame) -> list:
    """Semisimple part of right-x on X_0 as a dense matrix (rows = output coords).

    Newton iteration S <- S - f(S) f'(S)^(-1) with f the squarefree part of p;
    it converges in finitely many steps because the nilpotent part has index
    at most 2 * max multiplicity.
    """
    basis = F.basis0()
    pos = {b: i for i, b in enumerate(basis)}
    n = len(basis)
    A = linalg.mat_zero(n, n)
    for col, img in enumerate(F.x_operator0()):
        for key, v in img.items():
            A[pos[key]][col] = v
    if n == 0:
        return A
    f = _squarefree_part(F.p)
    df = [i * c for i, c in enumerate(f)][1:]
    S = A
    for _ in range(64):
        fS = _mat_poly_eval(f, S)
        if linalg.mat_is_zero(fS):
            return S
        S = linalg.mat_sub(S, linalg.mat_mul(fS, linalg.mat_inverse(_mat_poly_eval(df, S)), inner=n))
    raise RuntimeError("Newton iteration for the semisimple part did not converge")


def is_ss_submodule(U: AdelicPoint, S: list | None = None) -> bool:
    """U is stable under Gamma and the semisimple part of right-x."""
    F = U.frame
    if F.d == 0:
        return True
    S = semisimple_part(F) if S is None else S
    basis = F.basis0()
    pos = {b: i for i, b in enumerate(basis)}
    for v in U.U.basis():
        img: dict = {}
        for key, c in v.items():
            col = pos[key]
            for row in range(len(basis)):
                if S[row][col] != 0:
                    linalg.vec_iadd(img, {basis[row]: S[row][col] * c})
        if not U.U.contains(img):
            return False
    return U.is_gamma_stable()


def primary_decomposability_report(U: AdelicPoint) -> dict:
    """Both criteria; the root-block one only when p splits in Q(zeta_m)."""
    out = {"ss_criterion": is_ss_submodule(U)}
    try:
        ok, dims = is_primary_decomposable(U)
        out["root_blocks"] = ok
        out["block_dims"] = [(scalar_to_json(l), k) for l, k in dims]
    except UnsupportedField as exc:
        out["root_blocks"] = None
        out["unsupported"] = str(exc)
    out["ok"] = out["ss_criterion"] and out["root_blocks"] in (True, None)
    return out


# -- random points -----------------------------------------------------------------------


def random_primary_decomposable(F: Frame, rng: random.Random, S: list | None = None, ngens: int | None = None) -> AdelicPoint:
    """Closure under S (semisimple part) and Gamma of a few random vectors."""
    if F.d == 0:
        return AdelicPoint(F, Echelon())
    S = semisimple_part(F) if S is None else S
    basis = F.basis0()
    pos = {b: i for i, b in enumerate(basis)}

    def apply_S(v):
        out: dict = {}
        for key, c in v.items():
            col = pos[key]
            for row in range(len(basis)):
                if S[row][col] != 0:
                    linalg.vec_iadd(out, {basis[row]: S[row][col] * c})
        return out

    ngens = rng.randint(0, max(1, len(basis) // 2)) if ngens is None else ngens
    gens = []
    for _ in range(ngens):
        j = rng.randrange(F.m)
        support = [b for b in basis if F.idem0(*b) == j and rng.random() < 0.6]
        gens.append({b: random_rational(rng, -3, 3, 1) for b in support})
    ops = [apply_S] + [lambda v, j=j: F.right_idempotent0(v, j) for j in range(F.m)]
    return AdelicPoint(F, _close(Echelon(), [linalg.vec_clean(g) for g in gens], ops))


def random_fat_model(F: Frame, rng: random.Random, K: int, S: list | None = None) -> FatModuleModel:
    """Fat closure of a few random elements of Diff(U) for a random point U."""
    U = random_primary_decomposable(F, rng, S)
    N0 = diff(U, K)
    basis = N0.space.basis()
    gens = []
    for _ in range(U.dim + 1):
        j = rng.randrange(F.m)
        vec: dict = {}
        for b in basis:
            if rng.random() < 0.5:
                linalg.vec_iadd(vec, F.right_idempotent(b, j), random_rational(rng, -3, 3, 1))
        gens.append(vec)
    return fat_closure(F, gens, K)


def random_gamma_module(rng: random.Random, m: int, r: int) -> GammaModule:
    dims = [0] * m
    for _ in range(r):
        dims[rng.randrange(m)] += 1
    return GammaModule(tuple(dims))


def random_frame(rng: random.Random, m: int, d: int, r: int, free_orbits: bool | None = None) -> Frame:
    """A frame with generic tau and p of degree d.

    Roots of p off the origin (free Gamma-orbits) are only combined with a
    tau whose characters all agree when m > 1: for other generic tau the
    De Rham image of a fat module need not split along the individual roots
    (see ``free_orbit_splitting_example``)."""
    if free_orbits is None:
        free_orbits = m == 1 or rng.random() < 0.5
    W = random_gamma_module(rng, m, r)
    if m == 1:
        tau = GroupAlgElem(1, [random_rational(rng, 1, 4, 2) * rng.choice([1, -1])])
        p = [ONE]
        for _ in range(d):
            c = rng.choice([mpq(0), random_rational(rng, -3, 3, 2)]) if free_orbits else mpq(0)
            p = poly_mul(p, [-c, ONE])
        return Frame(tau, W, p)
    if free_orbits:
        c = random_rational(rng, 1, 4, 2) * rng.choice([1, -1])
        tau = GroupAlgElem(m, [c] * m)
        orbits = d // m
        mus = [random_rational(rng, 1, 3, 1) * rng.choice([1, -1]) for _ in range(orbits)]
        p = poly_from_x_power_and_factors(d - m * orbits, [(mu ** m, 1) for mu in mus], m)
    else:
        tau = random_generic_tau(rng, m)
        p = [ZERO] * d + [ONE]
    return Frame(tau, W, p)


def free_orbit_splitting_example() -> dict:
    """m = 2, tau with characters (1/3, 2/7), p = x^2 - 4, r = 1.

    The fat module generated by p y - (13/21) x has a 2-dimensional De Rham
    image which is Gamma-stable but does not split along the roots +-2; both
    splitting tests reject it while the De Rham/Diff roundtrip still closes."""
    tau = GroupAlgElem(2, [mpq(1, 3), mpq(2, 7)])
    F = Frame(tau, GammaModule((1, 0)), [mpq(-4), ZERO, ONE])
    gen = {(0, 2, 1): ONE, (0, 0, 1): mpq(-4), (0, 1, 0): mpq(-13, 21)}
    N = fat_closure(F, [gen], 4)
    U = de_rham(N)
    pd = primary_decomposability_report(U)
    return {
        "dim_U": U.dim,
        "U": [{f"{s},{a}": rational_to_str(v) for (s, a), v in sorted(b.items())} for b in U.U.basis()],
        "gamma_stable": U.is_gamma_stable(),
        "root_blocks": pd["root_blocks"],
        "ss_criterion": pd["ss_criterion"],
        "roundtrip": roundtrip_from_module(N)["ok"],
    }


# -- roundtrips -------------------------------------------------------------------------


def roundtrip_from_point(U: AdelicPoint, K: int) -> dict:
    N = diff(U, K)
    back = de_rham(N)
    return {"ok": back.U.equals(U.U), "dim_U": U.dim, "dim_back": back.dim, "dim_N": N.space.dim}


def roundtrip_from_module(N: FatModuleModel) -> dict:
    U = de_rham(N)
    back = diff(U, N.K)
    return {"ok": back.space.equals(N.space), "dim_N": N.space.dim, "dim_back": back.space.dim, "dim_U": U.dim}


def tau_zero_counterexample() -> dict:
    """m = 1, tau = 0, p = x, U = span{1}: here y acts by zero on C[x], so
    Diff(U) only sees the largest x-stable subspace of U, which is zero."""
    F = Frame(GroupAlgElem(1, [mpq(0)]), GammaModule((1,)), [mpq(0), mpq(1)])
    U = AdelicPoint(F, Echelon([{(0, 0): ONE}]))
    res = roundtrip_from_point(U, 2)
    res["generic"] = is_generic(F.tau)[0]
    return res


# -- the pipeline ----------------------------------------------------------------------


def invariant_normalization(P: dict, n: int, m: int) -> tuple:
    """p~(x) = x^n' P(x, 1) with n + n' = 0 mod m; returns (coefficients, n')."""
    n_extra = (-n) % m
    coeffs = [ZERO] * (n + n_extra + 1)
    for (a, t), c in P.items():
        coeffs[a + n_extra] = coeffs[a + n_extra] + c
    return poly_trim(coeffs), n_extra


@dataclass
class PipelineResult:
    point: AdelicPoint
    fat: FatModuleModel
    checks: dict
    log: list

    @property
    def ok(self) -> bool:
        return all(v is True or v is None for v in self.checks.values())


def quiver_to_adelic(d: QuiverData, bounds: tuple = (3, 3), K: int | None = None,
                     verify: bool = True) -> PipelineResult:
    """Quiver data -> monad -> trivialization -> fat module -> adelic point."""
    from .monad import apply_on_component, build_monad, build_trivialization

    log = []
    generic, cert = is_generic(d.tau)
    if not generic:
        raise ValueError(f"tau is not generic (window certificate {cert})")
    if not is_admissible(d):
        raise ValueError("quiver data violates the moment map equation")
    stable, witness = is_stable(d)
    if not stable:
        raise ValueError(f"quiver data is not stable (invariant subspace of dim {len(witness)})")
    M = build_monad(d)
    T = build_trivialization(M)
    log.append({"stage": "trivialization", "n": T.n, "P": {f"{a},{t}": rational_to_str(c) for (a, t), c in T.P.items()}})
    p, n_extra = invariant_normalization(T.P, T.n, d.m)
    F = Frame(d.tau, d.W, p)
    K = max(2 * F.d, bounds[1]) if K is None else K
    gens = []
    kb, lb = bounds
    for k in range(1, kb + 1):
        for l in range(1, lb + 1):
            _, b_imgs = apply_on_component(M.b, M.middle, M.target, k, l)
            _, psi_imgs = apply_on_component(T.Psi, M.middle, T.target, k, l)
            for v in linalg.kernel(b_imgs):
                img = linalg.apply_map(psi_imgs, v)
                vec: dict = {}
                for (s, (a, bz, c, dw, j)), val in img.items():
                    if F.idem(s, a + n_extra, c) != j % F.m:
                        raise AssertionError("idempotent mismatch in the fat-module generators")
                    for i, rc in F.rem(a + n_extra).items():
                        linalg.vec_iadd(vec, {(s, i, c): val * rc})
                if vec:
                    gens.append(vec)
    log.append({"stage": "generators", "count": len(gens), "p": [rational_to_str(c) for c in p]})
    N = fat_closure(F, gens, K)
    log.append({"stage": "fat-module", "dim": N.space.dim, "K": K, "closure_bound": N.info.get("closure_bound")})
    U = de_rham(N)
    log.append({"stage": "de-rham", "dim": U.dim})
    checks: dict = {}
    if verify:
        checks["closure_stable"] = N.info.get("dr_stable")
        checks["gamma_stable"] = U.is_gamma_stable()
        pd = primary_decomposability_report(U)
        checks["primary_decomposable"] = pd["ok"]
        sym = symbol(N)
        checks["symbol_is_base_point"] = sym["is_base_point"]
        checks["dim_U = d r"] = U.dim == F.d * F.r if sym["is_base_point"] else None
        back = diff(U, K)
        checks["diff(de_rham(N)) = N"] = back.space.equals(N.space)
        checks["de_rham(diff(U)) = U"] = de_rham(back).U.equals(U.U)
        log.append({"stage": "checks", **{k: v for k, v in checks.items()}})
    return PipelineResult(U, N, checks, log)


# -- a concrete slice of the group action -----------------------------------------------


def gw_action_sample(U: AdelicPoint, S: list, q: list | None = None) -> AdelicPoint:
    """Apply s = S / q to U, where S is an r x r matrix of polynomials in x
    (entry (s', s) a coefficient list whose degrees are = c_s' - c_s mod m) and
    q a Gamma-invariant polynomial.  The result lives in the frame of
    p' = p q D with D = det S (semi-invariance of D is required)."""
    F = U.frame
    r, m = F.r, F.m
    q = [ONE] if q is None else poly_trim([mpq(c) if isinstance(c, int) else c for c in q])
    if not is_semi_invariant(q, m) or (len(q) - 1) % m:
        raise ValueError("q must be Gamma-invariant")
    for a in range(r):
        for b in range(r):
            for t, c in enumerate(S[a][b]):
                if c != 0 and (t - (F.chars[a] - F.chars[b])) % m:
                    raise ValueError("S is not Gamma-equivariant")
    D = _poly_det(S)
    if not D:
        raise ValueError("S is not invertible")
    lead = D[-1]
    D = [c / lead for c in D]
    if not is_semi_invariant(D, m):
        raise ValueError("det S must be semi-invariant")
    pnew = poly_mul(poly_mul(F.p, q), D)
    G = Frame(F.tau, F.W, pnew)

    def apply(vec, scale_poly):
        # vec in X_0(F) coordinates as genuine polynomials; returns D-scaled S vec in X_0(G)
        out: dict = {}
        for (s, a), v in vec.items():
            for s2 in range(r):
                poly = poly_mul(scale_poly, S[s2][s])
                for t, c in enumerate(poly):
                    if c != 0:
                        for e, rc in G.rem(a + t).items():
                            linalg.vec_iadd(out, {(s2, e): v * c * rc})
        return out

    gens = [apply(v, D) for v in U.U.basis()]
    p2D = poly_mul(F.p2, D)
    for s in range(r):
        for i in range(2 * G.d):
            gens.append(apply({(s, i): ONE}, p2D))
    return AdelicPoint(G, Echelon(linalg.vec_clean(g) for g in gens))


def _poly_det(S: list) -> list:
    n = len(S)
    if n == 0:
        return [ONE]
    if n == 1:
        return poly_trim(S[0][0])
    out: list = []
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in S[1:]]
        term = poly_mul(S[0][j], _poly_det(minor))
        if j % 2:
            term = [-c for c in term]
        length = max(len(out), len(term))
        out = [(out[i] if i < len(out) else ZERO) + (term[i] if i < len(term) else ZERO) for i in range(length)]
    return poly_trim(out)


def reframe(U: AdelicPoint, q: list) -> AdelicPoint:
    """The same subspace of W (x) CG(x), stored in the frame of p q."""
    F = U.frame
    q = poly_trim([mpq(c) if isinstance(c, int) else c for c in q])
    G = Frame(F.tau, F.W, poly_mul(F.p, q))

    def times(vec, f):
        out: dict = {}
        for (s, a), v in vec.items():
            for t, c in enumerate(f):
                if c != 0:
                    for e, rc in G.rem(a + t).items():
                        linalg.vec_iadd(out, {(s, e): v * c * rc})
        return out

    gens = [times(v, q) for v in U.U.basis()]
    qp2 = poly_mul(q, F.p2)
    gens += [times({(s, i): ONE}, qp2) for s in range(F.r) for i in range(2 * G.d)]
    return AdelicPoint(G, Echelon(linalg.vec_clean(g) for g in gens))


def certified_diff(U: AdelicPoint, K: int, k_max: int | None = None) -> FatModuleModel:
    """Diff(U) together with the check DR(Diff(U)) = U."""
    N = diff(U, K, k_max)
    back = de_rham(N)
    if not back.U.equals(U.U):
        raise RoundtripFailure(
            "de_rham(diff(U)) != U",
            {"dim_U": U.dim, "dim_back": back.dim, "K": K, "k_max": N.info["k_max"]})
    return N
