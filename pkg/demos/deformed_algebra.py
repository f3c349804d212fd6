"""A tour of B_tau: genericity, the defining relation and the polynomial representation."""
from gmpy2 import mpq

from ncadelic.btau import BAlgebra, act_on_polynomials, commutator, commutator_y_pmu
from ncadelic.scalars import GroupAlgElem, is_generic

print("== genericity ==")
for chars in ([mpq(1)], [mpq(0)], [mpq(1), mpq(1)], [mpq(1), mpq(-1)]):
    tau = GroupAlgElem(len(chars), chars)
    ok, cert = is_generic(tau)
    print(f"characters {[str(c) for c in chars]}: generic={ok} certificate={cert}")

print("\n== relations for m = 2, characters (1/3, 2) ==")
tau = GroupAlgElem(2, [mpq(1, 3), mpq(2)])
alg = BAlgebra(tau)
x, y = alg.x(), alg.y()
print("[y, x] =", commutator(y, x))
print("y x^3  =", y * x * x * x)
for mu in (0, 2):
    lhs, rhs, ok = commutator_y_pmu(alg, mu)
    print(f"[y, p_mu] at mu={mu}: {lhs}   (matches closed form: {ok})")

print("\n== y acting on C[mu_2][x] = B / B y ==")
for k in range(1, 5):
    f = alg.polynomial([0] * k + [1])
    print(f"y . x^{k} = {act_on_polynomials(y, f)}")
