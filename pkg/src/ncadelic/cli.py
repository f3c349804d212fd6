"""Command-line front end.

Every subcommand prints JSON lines (one object per line, keys sorted) carrying
the subcommand name and a hash of its configuration, and exits with status 0
exactly when every identity it checked held.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import grassmannian as gr
from .monad import (
    build_monad,
    build_trivialization,
    h1_framing_check,
    monad_identities,
    restrict_to_line,
    trivialization_cokernel,
)
from .quadric import CohomologyTable, QAlgebra, koszul_check, quadratic_dual_table
from .quiver import (
    QuiverData,
    generate_cm,
    generate_cyclic,
    is_admissible,
    is_stable,
    stabilizer_dimension,
    trivial_instance,
)
from .scalars import GroupAlgElem, is_generic, parse_tau, rational_to_str, window_value

DEFAULT_FIXTURES = Path(__file__).resolve().parents[2] / "fixtures"


class Reporter:
    def __init__(self, command: str, config: dict, stream=None):
        self.command = command
        blob = json.dumps(config, sort_keys=True, default=str)
        self.config_hash = hashlib.sha256(blob.encode()).hexdigest()[:16]
        self.stream = stream or sys.stdout
        self.ok = True
        self.emit("config", config=config)

    def emit(self, event: str, **fields):
        record = {"cmd": self.command, "config": self.config_hash, "event": event}
        record.update(fields)
        self.stream.write(json.dumps(record, sort_keys=True, default=_json_default) + "\n")

    def check(self, name: str, ok: bool, **fields):
        self.ok = self.ok and bool(ok)
        self.emit("check", name=name, ok=bool(ok), **fields)

    def finish(self) -> int:
        self.emit("result", ok=self.ok)
        return 0 if self.ok else 1


def _json_default(obj):
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if isinstance(obj, tuple):
        return list(obj)
    try:
        return rational_to_str(obj)
    except (TypeError, ValueError):
        return str(obj)


def _parse_bounds(text: str) -> tuple:
    k, l = text.lower().split("x")
    return int(k), int(l)


def _parse_dims(text: str) -> tuple:
    return tuple(int(v) for v in text.split(",")) if text else ()


def _load_quiver(path: str) -> QuiverData:
    obj = json.loads(Path(path).read_text())
    return QuiverData.from_json(obj.get("quiver", obj))


def _stringify(obj):
    if isinstance(obj, dict):
        return {str(k): _stringify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_stringify(v) for v in obj]
    return obj


# -- subcommands ----------------------------------------------------------------


def brute_force_generic(tau: GroupAlgElem, span: int) -> bool:
    m = tau.m
    return all(window_value(tau, a, b, j) != 0
               for a in range(span + 1) for b in range(a, span + 1) for j in range(m))


def cmd_generic_check(args) -> int:
    tau = parse_tau(args.tau, args.m)
    rep = Reporter("generic-check", {"m": args.m, "tau": tau.to_json()})
    flag, cert = is_generic(tau)
    brute = brute_force_generic(tau, 4 * args.m)
    rep.emit("generic", generic=flag, certificate=cert)
    rep.check("agrees with brute force over 0 <= a <= b <= 4m", flag == brute, brute_force=brute)
    return rep.finish()


def cmd_gen_quiver(args) -> int:
    tau = parse_tau(args.tau, args.m)
    rng = random.Random(args.seed)
    if args.cm:
        d = generate_cm(args.cm, tau, rng)
    elif args.dims_v:
        d = generate_cyclic(_parse_dims(args.dims_v), _parse_dims(args.dims_w), tau, rng)
    else:
        d = trivial_instance(tau.charvals[0])
    config = {"m": args.m, "tau": tau.to_json(), "seed": args.seed, "cm": args.cm,
              "dims_V": args.dims_v, "dims_W": args.dims_w}
    rep = Reporter("gen-quiver", config)
    rep.check("admissible", is_admissible(d))
    rep.check("stable", is_stable(d)[0])
    if args.out:
        Path(args.out).write_text(json.dumps({"quiver": d.to_json()}, sort_keys=True, indent=1) + "\n")
        rep.emit("written", path=args.out)
    else:
        rep.emit("quiver", quiver=d.to_json())
    return rep.finish()


def cmd_verify_quiver(args) -> int:
    d = _load_quiver(args.file)
    rep = Reporter("verify-quiver", {"file": Path(args.file).name, "quiver": d.to_json()})
    rep.check("generic tau", is_generic(d.tau)[0])
    rep.check("admissible", is_admissible(d))
    stable, witness = is_stable(d)
    rep.check("stable", stable, witness_dim=len(witness))
    rep.check("trivial stabilizer", stabilizer_dimension(d) == 0)
    return rep.finish()


def _monad_report(rep: Reporter, d: QuiverData, box: int):
    M = build_monad(d)
    ident = monad_identities(M, box)
    for row in ident["rows"]:
        rep.emit("bidegree", **row)
    rep.check("monad identities", ident["ok"], box=box)
    h1 = h1_framing_check(M)
    rep.check("framing cohomology", h1["ok"], failures=h1["failures"])
    for which in ("z", "w"):
        line = restrict_to_line(M, which)
        rep.check(f"restriction to the {which}-line", line["ok"])
    return M


def cmd_monad(args) -> int:
    d = _load_quiver(args.file)
    k, _ = _parse_bounds(args.bounds)
    rep = Reporter("monad", {"quiver": d.to_json(), "box": k})
    _monad_report(rep, d, k)
    return rep.finish()


def _trivialization_report(rep: Reporter, M, box: int):
    T = build_trivialization(M, verify_box=box)
    rep.emit("trivialization", n=T.n, P={f"x^{a} z^{t}": rational_to_str(c) for (a, t), c in sorted(T.P.items())})
    for name, ok in T.checks.items():
        if name != "ok":
            rep.check(name, ok)
    if T.n:
        for kk in range(1, box + 1):
            res = trivialization_cokernel(T, kk, 1)
            rep.check("z-multiplication on coker psi", res["z_injective"] and res["coker"] == res["expected"], **res)
    return T


def cmd_trivialize(args) -> int:
    d = _load_quiver(args.file)
    k, _ = _parse_bounds(args.bounds)
    rep = Reporter("trivialize", {"quiver": d.to_json(), "box": k})
    M = build_monad(d)
    _trivialization_report(rep, M, k)
    return rep.finish()


def _pipeline_report(rep: Reporter, d: QuiverData, bounds: tuple, K: int | None):
    res = gr.quiver_to_adelic(d, bounds=bounds, K=K)
    for entry in res.log:
        rep.emit("stage", **entry)
    for name, ok in res.checks.items():
        if ok is None:
            rep.emit("skipped", name=name)
        else:
            rep.check(name, ok)
    return res


def cmd_pipeline(args) -> int:
    d = _load_quiver(args.file)
    bounds = _parse_bounds(args.bounds)
    rep = Reporter("pipeline", {"quiver": d.to_json(), "bounds": bounds, "trunc_y": args.trunc_y})
    res = _pipeline_report(rep, d, bounds, args.trunc_y)
    rep.emit("point", point=res.point.to_json())
    if args.out:
        Path(args.out).write_text(json.dumps(res.point.to_json(), sort_keys=True, indent=1) + "\n")
    return rep.finish()


def roundtrip_sample(m: int, d: int, r: int, seed: int, K: int | None) -> dict:
    rng = random.Random(seed)
    F = gr.random_frame(rng, m, d, r)
    S = gr.semisimple_part(F)
    K = 2 * F.d + 1 if K is None else K
    U = gr.random_primary_decomposable(F, rng, S)
    pd = gr.primary_decomposability_report(U)
    point = gr.roundtrip_from_point(U, K)
    module = gr.roundtrip_from_module(gr.random_fat_model(F, rng, K, S))
    return {"seed": seed, "p": [rational_to_str(c) for c in F.p], "tau": F.tau.to_json(),
            "W": list(F.W.dims), "primary_decomposable": pd["ok"],
            "dr_diff": point["ok"], "diff_dr": module["ok"], "dim_U": point["dim_U"]}


def cmd_roundtrip(args) -> int:
    config = {"m": args.m, "d": args.d, "r": args.r, "count": args.count, "seed": args.seed, "trunc_y": args.trunc_y}
    rep = Reporter("roundtrip", config)
    seeds = [args.seed * 100003 + i for i in range(args.count)]
    tasks = [(args.m, args.d, args.r, s, args.trunc_y) for s in seeds]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_roundtrip_task, tasks))
    else:
        results = [_roundtrip_task(t) for t in tasks]
    for res in results:
        rep.check("roundtrip sample", res["primary_decomposable"] and res["dr_diff"] and res["diff_dr"], **res)
    ce = gr.tau_zero_counterexample()
    rep.emit("expected-fail", name="tau = 0 counterexample", roundtrip=ce["ok"], generic=ce["generic"])
    rep.check("tau = 0 counterexample fails", not ce["ok"])
    return rep.finish()


def _roundtrip_task(task):
    return roundtrip_sample(*task)


def cmd_cohomology_table(args) -> int:
    lo, hi = (int(v) for v in args.range.split(":"))
    rep = Reporter("cohomology-table", {"m": args.m, "range": [lo, hi]})
    table = CohomologyTable(args.m, lo, hi)
    for row in table.json_lines():
        rep.emit("row", **row)
    rep.check("Serre symmetry", table.serre_symmetric())
    rep.check("Euler characteristic (i+1)(j+1)m", table.euler_is_polynomial())
    rep.check("vanishing at -1", table.vanishing_strip())
    return rep.finish()


def cmd_koszul_check(args) -> int:
    tau = parse_tau(args.tau, args.m)
    box = _parse_bounds(args.box)
    rep = Reporter("koszul-check", {"m": args.m, "tau": tau.to_json(), "box": box})
    alg = QAlgebra(tau)
    dual = quadratic_dual_table(tau)
    rep.check("quadratic dual table", dual["ok"], dims=_stringify(dual["dims"]), failures=dual["failures"])
    for I in ((1, 2), (1,), (2,)):
        res = koszul_check(tau, I, box, alg)
        rep.check(f"Koszul complex exact, generators {list(I)}", res["ok"], failures=res["failures"])
    return rep.finish()


def load_fixtures(directory: Path) -> list:
    return [(p.stem, json.loads(p.read_text())) for p in sorted(directory.glob("*.json"))]


def _selftest_fixture(item) -> list:
    name, obj = item
    lines = []

    class Collect:
        def write(self, text):
            lines.append(text)

    d = QuiverData.from_json(obj["quiver"])
    bounds = tuple(obj.get("bounds", (3, 3)))
    rep = Reporter("selftest", {"fixture": name, "bounds": bounds}, stream=Collect())
    rep.check("admissible", is_admissible(d))
    rep.check("stable", is_stable(d)[0])
    M = _monad_report(rep, d, 4)
    _trivialization_report(rep, M, 3)
    res = _pipeline_report(rep, d, bounds, None)
    if obj.get("point") is not None:
        frozen = gr.AdelicPoint.from_json(obj["point"])
        rep.check("matches frozen point", frozen.equals(res.point))
    rep.finish()
    return [rep.ok, lines]


def cmd_selftest(args) -> int:
    directory = Path(args.fixtures) if args.fixtures else DEFAULT_FIXTURES
    rep = Reporter("selftest", {"fixtures": directory.name})
    items = load_fixtures(directory)
    if not items:
        rep.check("fixtures present", False, directory=str(directory))
        return rep.finish()
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            outputs = list(pool.map(_selftest_fixture, items))
    else:
        outputs = [_selftest_fixture(item) for item in items]
    for (name, _), (ok, lines) in zip(items, outputs):
        for text in lines:
            sys.stdout.write(text)
        rep.check("fixture", ok, fixture=name)
    ce = gr.tau_zero_counterexample()
    rep.emit("expected-fail", name="tau = 0 counterexample", roundtrip=ce["ok"])
    rep.check("tau = 0 counterexample fails", not ce["ok"])
    dev = gr.free_orbit_splitting_example()
    rep.emit("documented-deviation", name="free-orbit splitting", **dev)
    return rep.finish()


# -- argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=int, default=1, help="order of the cyclic group")
    common.add_argument("--tau", default="1", help='"c", "c0,c1,..." (characters) or "g:..." (group basis)')
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--bounds", default="3x3", help="KxL bidegree bounds")
    common.add_argument("--trunc-y", type=int, default=None, help="y-degree truncation K of fat models")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--fixtures", default=None, help="fixture directory")

    parser = argparse.ArgumentParser(prog="ncadelic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("generic-check", parents=[common]).set_defaults(func=cmd_generic_check)

    p = sub.add_parser("gen-quiver", parents=[common])
    p.add_argument("--cm", type=int, default=0, help="Calogero-Moser data with n particles (m = 1)")
    p.add_argument("--dims-v", default="", help="comma-separated dims of V")
    p.add_argument("--dims-w", default="", help="comma-separated dims of W")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen_quiver)

    for name, func in (("verify-quiver", cmd_verify_quiver), ("monad", cmd_monad), ("trivialize", cmd_trivialize)):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("file")
        p.set_defaults(func=func)

    p = sub.add_parser("pipeline", parents=[common])
    p.add_argument("file")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("roundtrip", parents=[common])
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--count", type=int, default=30)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("cohomology-table", parents=[common])
    p.add_argument("--range", default="-5:5", help="lo:hi")
    p.set_defaults(func=cmd_cohomology_table)

    p = sub.add_parser("koszul-check", parents=[common])
    p.add_argument("--box", default="4x4")
    p.set_defaults(func=cmd_koszul_check)

    sub.add_parser("selftest", parents=[common]).set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    code = args.func(args)
    sys.stderr.write(f"{args.command}: {'ok' if code == 0 else 'FAILED'} in {time.perf_counter() - start:.2f}s\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
