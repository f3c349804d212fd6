"""Normal forms in the deformed smash product B = C<x,y>#mu_m / ([y,x] = tau).

Elements are stored in the basis x^a y^b e_j, where e_j are the character
idempotents of C[mu_m] (chi_i(e_j) = delta_ij).  With g x g^-1 = eps(g) x and
g y g^-1 = eps(g)^-1 y one gets the commutation rules

    e_j x = x e_{j-1},      e_j y = y e_{j+1},

so a product of basis monomials is either zero or a combination of monomials
with the same trailing idempotent, and all group-algebra coefficients become
scalars.  Group-basis terms (coefficients of x^a y^b g) are an I/O view.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Iterable

from gmpy2 import mpq

from . import linalg
from .linalg import Echelon, vec_iadd
from .scalars import (
    ONE,
    ZERO,
    GroupAlgElem,
    Q,
    is_generic,
    scalar_from_json,
    scalar_to_json,
    tau_shift,
    tau_window,
    window_value,
    zeta_power,
)


class BAlgebra:
    """The algebra B_tau for a fixed m and tau, with cached reordering tables."""

    def __init__(self, tau: GroupAlgElem):
        self.tau = tau
        self.m = tau.m
        self._cache: dict = {}

    def __eq__(self, other):
        return isinstance(other, BAlgebra) and self.tau == other.tau

    def __hash__(self):
        return hash(self.tau)

    def reorder(self, b: int, c: int, k: int) -> dict:
        """Normal form of y^b x^c e_k as {(alpha, beta): coefficient} meaning
        sum coefficient * x^alpha y^beta e_k.

        Uses y x^c = x^c y + x^(c-1) tau_[0,c-1] and tau e_k = chi_k(tau) e_k.
        """
        k %= self.m
        key = (b, c, k)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if b == 0 or c == 0:
            out = {(c, b): ONE}
        else:
            out = {}
            for (al, be), v in self.reorder(b - 1, c, k - 1).items():
                out[(al, be + 1)] = v
            coef = window_value(self.tau, 0, c - 1, k)
            if coef != 0:
                for (al, be), v in self.reorder(b - 1, c - 1, k).items():
                    nv = out.get((al, be), ZERO) + coef * v
                    if nv == 0:
                        out.pop((al, be), None)
                    else:
                        out[(al, be)] = nv
        self._cache[key] = out
        return out

    def monomial_product(self, a: int, b: int, j: int, c: int, d: int, k: int) -> dict:
        """(x^a y^b e_j)(x^c y^d e_k) as {(a', b', k): coefficient}."""
        m = self.m
        if (j - c + d - k) % m:
            return {}
        out = {}
        for (al, be), v in self.reorder(b, c, k - d).items():
            out[(a + al, be + d, k % m)] = v
        return out

    # -- elements -----------------------------------------------------------
    def elem(self, terms: dict | None = None) -> "BElem":
        return BElem(self, terms or {})

    def zero(self) -> "BElem":
        return BElem(self, {})

    def one(self) -> "BElem":
        return BElem(self, {(0, 0, j): ONE for j in range(self.m)})

    def x(self) -> "BElem":
        return BElem(self, {(1, 0, j): ONE for j in range(self.m)})

    def y(self) -> "BElem":
        return BElem(self, {(0, 1, j): ONE for j in range(self.m)})

    def group_algebra(self, t: GroupAlgElem) -> "BElem":
        return BElem(self, {(0, 0, j): v for j, v in enumerate(t.charvals) if v != 0})

    def gamma(self, k: int = 1) -> "BElem":
        """The group element g^k (g acts on the line by zeta_m)."""
        return BElem(self, {(0, 0, j): zeta_power(self.m, j * k) for j in range(self.m)})

    def idempotent(self, j: int) -> "BElem":
        return BElem(self, {(0, 0, j % self.m): ONE})

    def polynomial(self, coeffs) -> "BElem":
        """sum_k coeffs[k] x^k (coefficients central scalars)."""
        terms = {}
        for k, c in enumerate(coeffs):
            c = Q(c)
            if c != 0:
                for j in range(self.m):
                    terms[(k, 0, j)] = c
        return BElem(self, terms)

    def x_poly_with_coeffs(self, coeffs: dict) -> "BElem":
        """sum_k x^k t_k with t_k in C[mu_m] placed to the right of x^k."""
        terms = {}
        for k, t in coeffs.items():
            for j, v in enumerate(t.charvals):
                if v != 0:
                    terms[(k, 0, j)] = v
        return BElem(self, terms)


class BElem:
    """Immutable element of B in the basis x^a y^b e_j."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: BAlgebra, terms: dict):
        self.alg = alg
        self.terms = {k: v for k, v in terms.items() if v != 0}

    @property
    def m(self):
        return self.alg.m

    @property
    def tau(self):
        return self.alg.tau

    def _check(self, other: "BElem"):
        if not isinstance(other, BElem):
            raise TypeError("expected a BElem")
        if other.alg.tau != self.alg.tau:
            raise ValueError("elements of B for different m or tau")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        vec_iadd(out, other.terms)
        return BElem(self.alg, out)

    def __sub__(self, other):
        self._check(other)
        out = dict(self.terms)
        vec_iadd(out, other.terms, -1)
        return BElem(self.alg, out)

    def __neg__(self):
        return BElem(self.alg, {k: -v for k, v in self.terms.items()})

    def scale(self, c) -> "BElem":
        return BElem(self.alg, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, BElem):
            return self.scale(other)
        return b_multiply(self, other)

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        return isinstance(other, BElem) and self.alg.tau == other.alg.tau and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def fdeg(self) -> int:
        """Order filtration degree (maximal y-degree); -1 for zero."""
        return max((b for (_, b, _) in self.terms), default=-1)

    def top(self) -> "BElem":
        """Terms of maximal y-degree."""
        d = self.fdeg()
        return BElem(self.alg, {k: v for k, v in self.terms.items() if k[1] == d})

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = [f"({v})*x^{a}y^{b}e{j}" for (a, b, j), v in sorted(self.terms.items())]
        return " + ".join(parts)

    # -- group basis view --------------------------------------------------
    def group_terms(self) -> dict:
        """{(a, b, g): coefficient of x^a y^b g^g} via e_j = (1/m) sum_g zeta^(-jg) g^g."""
        m = self.m
        grouped: dict = {}
        for (a, b, j), v in self.terms.items():
            grouped.setdefault((a, b), {})[j] = v
        out = {}
        for (a, b), cv in grouped.items():
            for g in range(m):
                acc = ZERO
                for j, v in cv.items():
                    acc = acc + v * zeta_power(m, -j * g)
                acc = acc / m
                if acc != 0:
                    out[(a, b, g)] = acc
        return out

    def to_json(self) -> dict:
        terms = [
            {"a": a, "b": b, "g": g, "c": scalar_to_json(v)}
            for (a, b, g), v in sorted(self.group_terms().items())
        ]
        return {"tau": self.tau.to_json(), "terms": terms}

    @classmethod
    def from_json(cls, obj: dict) -> "BElem":
        tau = GroupAlgElem.from_json(obj["tau"])
        alg = BAlgebra(tau)
        out = alg.zero()
        for t in obj["terms"]:
            term = alg.elem({(t["a"], t["b"], j): ONE for j in range(alg.m)})
            out = out + b_multiply(term, alg.gamma(t["g"])).scale(scalar_from_json(t["c"]))
        return out


def b_multiply(u: BElem, v: BElem) -> BElem:
    """Normal form of u*v."""
    u._check(v)
    alg = u.alg
    m = alg.m
    by_left_idem: dict = {}
    for (c, d, k), val in v.terms.items():
        # e_j x^c y^d = x^c y^d e_{j-c+d}; group v's terms by the j they accept
        by_left_idem.setdefault((k + c - d) % m, []).append((c, d, k, val))
    out: dict = {}
    for (a, b, j), uv in u.terms.items():
        for c, d, k, vv in by_left_idem.get(j, ()):
            coef = uv * vv
            for key, w in alg.monomial_product(a, b, j, c, d, k).items():
                nv = out.get(key, ZERO) + coef * w
                if nv == 0:
                    out.pop(key, None)
                else:
                    out[key] = nv
    return BElem(alg, out)


def commutator(u: BElem, v: BElem) -> BElem:
    return b_multiply(u, v) - b_multiply(v, u)


# ---------------------------------------------------------------------------
# commutator identity [y, p_mu(x)] = tau_[0, m_mu - 1]/m_mu * p_mu'(x)


def p_mu_coeffs(m: int, mu) -> list:
    """Coefficients of p_mu: x for mu = 0, x^m - mu^m otherwise."""
    mu = Q(mu)
    if mu == 0:
        return [ZERO, ONE]
    return [-(mu ** m)] + [ZERO] * (m - 1) + [ONE]


def m_mu(m: int, mu) -> int:
    return 1 if Q(mu) == 0 else m


def formal_derivative(coeffs) -> list:
    return [k * Q(c) for k, c in enumerate(coeffs)][1:] or [ZERO]


def commutator_y_pmu(alg: BAlgebra, mu):
    """Both sides of [y, p_mu(x)] = tau_[0,m_mu-1]/m_mu * p_mu'(x).

    The left side is computed with :func:`b_multiply`.  The right side is built
    directly from tau_window, the formal derivative and the shift rule
    t x^k = x^k t^(k) (no normal-ordering involved).
    Returns ``(lhs, rhs, equal)``.
    """
    m = alg.m
    coeffs = p_mu_coeffs(m, mu)
    p = alg.polynomial(coeffs)
    y = alg.y()
    lhs = b_multiply(y, p) - b_multiply(p, y)
    mm = m_mu(m, mu)
    c = tau_window(alg.tau, 0, mm - 1) / mm
    dp = formal_derivative(coeffs)
    rhs_coeffs = {k: tau_shift(c, k) * dk for k, dk in enumerate(dp) if dk != 0}
    rhs = alg.x_poly_with_coeffs(rhs_coeffs)
    return lhs, rhs, lhs == rhs


# ---------------------------------------------------------------------------
# the left B-module C[mu_m][x] = B / B y


def y_action_on_polynomials(f: BElem) -> BElem:
    """y . f in B/B y: multiply and drop every term of positive y-degree."""
    if f.fdeg() > 0:
        raise ValueError("expected an element of C[mu_m][x] (no y terms)")
    prod = b_multiply(f.alg.y(), f)
    return BElem(f.alg, {k: v for k, v in prod.terms.items() if k[1] == 0})


def act_on_polynomials(u: BElem, f: BElem) -> BElem:
    """Left action of u in B on f in C[mu_m][x] = B/By."""
    prod = b_multiply(u, f)
    return BElem(f.alg, {k: v for k, v in prod.terms.items() if k[1] == 0})


def associated_graded_check(u: BElem, v: BElem) -> bool:
    """Top y-degree part of u*v equals the product of top parts in C[x,y]#mu_m.

    The comparison product is computed in B_0 (tau = 0), which is C[x,y]#mu_m.
    """
    alg0 = BAlgebra(GroupAlgElem.scalar(u.m, 0))
    uv = b_multiply(u, v)
    if uv.fdeg() > u.fdeg() + v.fdeg():
        return False
    tu = BElem(alg0, u.top().terms)
    tv = BElem(alg0, v.top().terms)
    graded = b_multiply(tu, tv)
    if graded.is_zero():
        return uv.fdeg() < u.fdeg() + v.fdeg()
    return uv.fdeg() == u.fdeg() + v.fdeg() and uv.top().terms == graded.terms


def random_belem(alg: BAlgebra, rng, max_x: int = 3, max_y: int = 3, nterms: int = 4) -> BElem:
    terms = {}
    for _ in range(nterms):
        key = (rng.randint(0, max_x), rng.randint(0, max_y), rng.randrange(alg.m))
        terms[key] = mpq(rng.randint(-4, 4), rng.randint(1, 3))
    return BElem(alg, terms)


# ---------------------------------------------------------------------------
# Kashiwara functors on y-truncated modules


class NotGenericError(ValueError):
    def __init__(self, certificate):
        super().__init__(f"tau is not generic; vanishing window (a, b, j) = {certificate}")
        self.certificate = certificate


class TruncationError(RuntimeError):
    pass


class TruncatedModule:
    """A right B-module modelled by a finite frame of monomial coordinates.

    ``basis`` lists coordinate keys; ``act(key, h)`` returns the right action of
    the B-element h on a basis vector as a sparse vector, with y-degrees above
    ``bound_y`` dropped.  ``space`` is the spanned subspace (the whole frame
    for induced modules).  ``ydeg(key)`` gives the order filtration degree of a
    coordinate.
    """

    def __init__(self, alg: BAlgebra, basis: list, act, ydeg, bound_y: int, space: Echelon | None = None,
                 description: str = ""):
        self.alg = alg
        self.basis = basis
        self._act = act
        self.ydeg = ydeg
        self.bound_y = bound_y
        self.description = description
        if space is None:
            space = Echelon({k: ONE} for k in basis)
        self.space = space

    @property
    def dim(self) -> int:
        return self.space.dim

    def act_vec(self, vec: dict, h: BElem) -> dict:
        out: dict = {}
        for key, c in vec.items():
            vec_iadd(out, self._act(key, h), c)
        return out

    def operator_images(self, vectors, h: BElem) -> list:
        return [self.act_vec(v, h) for v in vectors]

    def filtered_part(self, k: int) -> Echelon:
        """Subspace of elements of order filtration degree <= k."""
        return linalg.restrict_to_coordinates(self.space, lambda key: self.ydeg(key) <= k)

    def kernel_of(self, h: BElem, inside: Echelon | None = None) -> Echelon:
        inside = self.space if inside is None else inside
        basis = inside.basis()
        images = self.operator_images(basis, h)
        out = Echelon()
        for combo in linalg.kernel(images):
            v: dict = {}
            for i, c in combo.items():
                vec_iadd(v, basis[i], c)
            out.add(v)
        return out


def kashiwara_I(alg: BAlgebra, U, mu, bound_y: int) -> TruncatedModule:
    """Model of U (x)_{C Gamma_mu [x]} B truncated at y-degree bound_y.

    For mu = 0 (Gamma_mu = mu_m) ``U`` is a list of character multiplicities;
    for mu != 0 (Gamma_mu trivial) ``U`` is a dimension.  Basis vectors
    u_s (x) y^b e_j; x acts on U through mu, so x^a y^b e_j contributes
    mu^a u_s (x) y^b e_j.
    """
    ok, cert = is_generic(alg.tau)
    if not ok:
        raise NotGenericError(cert)
    mu = Q(mu)
    m = alg.m
    basis = []
    if mu == 0:
        chars = []
        for c, mult in enumerate(U):
            chars.extend([c] * mult)
        for s, c in enumerate(chars):
            for b in range(bound_y + 1):
                basis.append((s, b, (c + b) % m))
    else:
        for s in range(int(U)):
            for b in range(bound_y + 1):
                for j in range(m):
                    basis.append((s, b, j))
    mu_pow = {0: ONE}

    def mupow(a):
        if a not in mu_pow:
            mu_pow[a] = mu ** a
        return mu_pow[a]

    def act(key, h: BElem):
        s, b, j = key
        out: dict = {}
        for (c, d, k), v in h.terms.items():
            for (a2, b2, k2), w in alg.monomial_product(0, b, j, c, d, k).items():
                if b2 > bound_y:
                    continue
                if mu == 0 and a2 > 0:
                    continue
                coef = v * w * mupow(a2)
                if coef != 0:
                    vec_iadd(out, {(s, b2, k2): coef})
        return out

    return TruncatedModule(alg, basis, act, lambda key: key[1], bound_y,
                           description=f"I_mu(U), mu={mu}, U={U}")


def kashiwara_K(M: TruncatedModule, mu):
    """Ker(x - mu) on the module, with stability across the top two y-bounds.

    Returns ``(dim, multiplicities)``; multiplicities are per character of
    Gamma_mu (the list [dim] when Gamma_mu is trivial).
    """
    alg = M.alg
    mu = Q(mu)
    h = alg.x() - alg.one().scale(mu)
    top = M.kernel_of(h)
    lower = M.kernel_of(h, M.filtered_part(M.bound_y - 1)) if M.bound_y > 0 else Echelon()
    if top.dim != lower.dim:
        raise TruncationError(
            f"Ker(x - mu) not stable: dim {lower.dim} at bound {M.bound_y - 1}, {top.dim} at {M.bound_y}; "
            "increase truncation"
        )
    if mu == 0:
        mults = []
        basis = top.basis()
        for k in range(alg.m):
            mults.append(linalg.rank(M.operator_images(basis, alg.idempotent(k))))
    else:
        mults = [top.dim]
    return top.dim, mults


def pym_recursion_check(M: TruncatedModule, mu, k_max: int) -> dict:
    """Check the window-sum identities on the graded pieces M_k = ker p^(k+1)/ker p^k.

    For right modules (actions composed left to right, a.y.p = (a y) p) the
    identities read

        (y.p)|M_k     = sum_{i=0}^{k}   tau_[-i, -i+m_mu-1]/m_mu * p'
        (p.y)|M_{k+1} = sum_{i=1}^{k+1} tau_[-i, -i+m_mu-1]/m_mu * p'

    which is the image of the left-module statement under the anti-isomorphism
    x -> x, y -> -y, g -> g^-1 (it flips the sign and reverses windows).
    Also checks that y induces bijections M_k -> M_{k+1}.
    Requires ``M.bound_y >= k_max + 2``.
    """
    alg = M.alg
    m = alg.m
    mu = Q(mu)
    if M.bound_y < k_max + 2:
        raise TruncationError("pym check needs bound_y >= k_max + 2")
    coeffs = p_mu_coeffs(m, mu)
    mm = m_mu(m, mu)
    p = alg.polynomial(coeffs)
    dp = alg.polynomial(formal_derivative(coeffs))
    y = alg.y()
    yp = b_multiply(y, p)
    py = b_multiply(p, y)

    # A[k] = ker p^(k+1); A[-1] = 0
    A = {-1: Echelon()}
    power = p
    for k in range(0, k_max + 2):
        A[k] = M.kernel_of(power)
        power = b_multiply(power, p)

    def window_sum(lo, hi):
        acc = GroupAlgElem.scalar(m, 0)
        for i in range(lo, hi + 1):
            acc = acc + tau_window(alg.tau, -i, -i + mm - 1)
        return acc / mm

    report = {"ok": True, "failures": []}
    for k in range(-1, k_max + 1):
        # (y.p) on M_k
        if k >= 0:
            rhs = b_multiply(alg.group_algebra(window_sum(0, k)), dp)
            for a in A[k].basis():
                diff = linalg.vec_add(M.act_vec(a, yp), M.act_vec(a, rhs), -1)
                if not A[k - 1].contains(diff):
                    report["ok"] = False
                    report["failures"].append(("y.p", k))
                    break
        # (p.y) on M_{k+1}
        rhs = b_multiply(alg.group_algebra(window_sum(1, k + 1)), dp)
        for a in A[k + 1].basis():
            diff = linalg.vec_add(M.act_vec(a, py), M.act_vec(a, rhs), -1)
            if not A[k].contains(diff):
                report["ok"] = False
                report["failures"].append(("p.y", k + 1))
                break
        # y : M_k -> M_{k+1} bijective
        if k >= 0:
            dk = A[k].dim - A[k - 1].dim
            dk1 = A[k + 1].dim - A[k].dim
            images = M.operator_images(A[k].basis(), y)
            inside = all(A[k + 1].contains(v) for v in images)
            r = linalg.quotient_rank(images, A[k])
            if not (inside and dk == dk1 == r):
                report["ok"] = False
                report["failures"].append(("y-bijective", k))
    report["graded_dims"] = [A[k].dim - A[k - 1].dim for k in range(0, k_max + 2)]
    return report
