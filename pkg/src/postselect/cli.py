"""Command-line front end.

Every subcommand reads a JSON input document::

    {
      "format_version": 1,
      "matrices": {"rho": [[[0.667, 0], [0, 0]], [[0, 0], [0.333, 0]]], ...},
      "channels": {"M": {"kraus": [<matrix>, ...]} | {"choi": <matrix>, "dim_in": 2, "dim_out": 2}},
      "sets": {"F": ["sigma1", "sigma2"]},
      "cones": {"C": {"variant": "classical", "dim": 2} | {"variant": "boxworld"} | ...},
      "vectors": {"x": {"cone": "C", "vector": [...]}}
    }

Matrix entries are ``[re, im]`` pairs (plain numbers are read as real).
Exit status: 0 success, 1 invalid input or usage, 2 computation error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import asym, channels, composite, divergence, gpt, oracle, simulate, sym
from .errors import ComputationError, PostselectError, ValidationError
from .linalg import DEFAULT_TOL

FORMAT_VERSION = 1


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")



def _matrix(raw, name: str) -> np.ndarray:
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"matrix {name!r} is not numeric") from exc
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(np.complex128)
    raise ValidationError(f"matrix {name!r} must be rows of [re, im] pairs")


@dataclass
class Document:
    matrices: dict[str, np.ndarray] = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def matrix(self, name: str) -> np.ndarray:
        if name not in self.matrices:
            raise ValidationError(f"unknown matrix {name!r}")
        return self.matrices[name]

    def _section(self, key: str, name: str):
        section = self.raw.get(key, {})
        if name not in section:
            raise ValidationError(f"unknown {key[:-1]} {name!r}")
        return section[name]

    def channel(self, name: str) -> channels.QuantumChannel:
        entry = self._section("channels", name)
        if "kraus" in entry:
            return channels.QuantumChannel.from_kraus([_matrix(k, name) for k in entry["kraus"]])
        if "choi" in entry:
            return channels.QuantumChannel.from_choi(_matrix(entry["choi"], name), int(entry["dim_in"]), int(entry["dim_out"]))
        raise ValidationError(f"channel {name!r} needs 'kraus' or 'choi'")

    def state_set(self, name: str) -> composite.ConvexStateSet:
        return composite.ConvexStateSet(tuple(self.matrix(g) for g in self._section("sets", name)))

    def cone(self, name: str) -> gpt.ConeModel:
        entry = self._section("cones", name)
        variant = entry.get("variant")
        if variant == "boxworld":
            return gpt.ConeModel.boxworld()
        if variant in (gpt.QUANTUM, gpt.CLASSICAL):
            return gpt.ConeModel(variant, int(entry["dim"]))
        if variant == gpt.POLYHEDRAL:
            return gpt.ConeModel.polyhedral(entry["dual_generators"], entry["unit_effect"])
        raise ValidationError(f"cone {name!r} has unknown variant {variant!r}")

    def gpt_state(self, name: str) -> gpt.GptState:
        entry = self._section("vectors", name)
        cone = self.cone(entry["cone"])
        vec = _matrix(entry["vector"], name) if cone.variant == gpt.QUANTUM else entry["vector"]
        return gpt.GptState(cone, vec)


def load_document(path: str) -> Document:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationError("input document must be a JSON object")
    if raw.get("format_version", FORMAT_VERSION) != FORMAT_VERSION:
        raise ValidationError(f"unsupported format_version {raw.get('format_version')!r}")
    mats = {name: _matrix(m, name) for name, m in raw.get("matrices", {}).items()}
    return Document(mats, raw)



def _jsonable(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "inf" if math.isinf(v) else v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.ndarray):
        if np.iscomplexobj(v):
            return [[[float(z.real), float(z.imag)] for z in row] for row in v]
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _human(v):
    if isinstance(v, (float, np.floating)):
        return "inf" if math.isinf(v) else f"{float(v):.6g}"
    if isinstance(v, np.ndarray):
        return "[" + ", ".join(_human(x) for x in v.tolist()) + "]"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_human(x) for x in v) + "]"
    return str(v)


def _emit(args, result: dict, out) -> None:
    if args.json:
        command = " ".join(filter(None, (args.command, getattr(args, "gpt_command", None))))
        doc = {"command": command, "tol": args.tol, "result": result}
        out.write(json.dumps(_jsonable(doc)) + "\n")
    else:
        for key, value in result.items():
            out.write(f"{key} = {_human(value)}\n")


def _matrix_json(m: np.ndarray):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]



def _pair(args, doc):
    return doc.matrix(args.rho), doc.matrix(args.sigma)


def cmd_divergence(args, doc, out):
    rho, sigma = _pair(args, doc)
    if args.command == "dmax":
        res = {"dmax": divergence.dmax(rho, sigma, args.tol)}
    elif args.command == "omega":
        om = divergence.omega(rho, sigma, args.tol)
        res = {"omega": om, "d_omega": math.inf if math.isinf(om) else math.log2(om)}
    else:
        x = divergence.xi(rho, sigma, args.tol)
        res = {"xi": x, "d_xi": math.inf if math.isinf(x) else math.log2(x)}
    _emit(args, res, out)
    return 0


def cmd_asym(args, doc, out):
    rho, sigma = _pair(args, doc)
    rep = asym.postselected_beta(rho, sigma, args.eps, args.tol, with_povm=True)
    if args.povm_out:
        povm = asym.optimal_povm_asym(rho, sigma, args.eps, args.tol)
        Path(args.povm_out).write_text(json.dumps({
            "format_version": FORMAT_VERSION,
            "matrices": {name: _matrix_json(m) for name, m in zip(("m1", "m2", "m_inconclusive"), povm.effects)},
        }) + "\n")
    _emit(args, {"epsilon": rep.epsilon, "beta_bar": rep.beta_bar, "omega": rep.omega_value,
                 "warnings": list(rep.warnings)}, out)
    return 0


def cmd_sym(args, doc, out):
    wp = divergence.WeightedPair(*_pair(args, doc), args.p)
    rep = sym.postselected_perr(wp, args.tol, with_povm=False)
    _emit(args, {"p": rep.p, "perr_bar": rep.perr_bar, "xi": rep.xi_value,
                 "dominant_side": rep.dominant_side, "helstrom_error": divergence.helstrom_error(wp)}, out)
    return 0


def cmd_composite(args, doc, out):
    rep = composite.omega_min(doc.matrix(args.rho), doc.state_set(args.set), seed=args.seed, support_tol=args.tol)
    _emit(args, {"omega_min": rep.omega_min, "beta_bar": rep.beta_bar(args.eps), "weights": rep.weights,
                 "lower_bound": rep.lower_bound, "attained": rep.attained, "warnings": list(rep.warnings)}, out)
    return 0


def cmd_channel(args, doc, out):
    m, n = doc.channel(args.m), doc.channel(args.n)
    rep = channels.channel_report(m, n, args.tol)
    d_asym, d_sym = channels.channel_exponents(m, n, args.tol)
    res = {"copies": args.copies, "omega": rep.omega, "xi": rep.xi,
           "exponent_asym": d_asym, "exponent_sym": d_sym}
    if args.eps is not None:
        res["beta_bar"] = channels.channel_beta(m, n, args.eps, args.copies, args.tol)
    else:
        res["perr_bar"] = channels.channel_perr(m, n, args.p, args.copies, args.tol)
    _emit(args, res, out)
    return 0


def cmd_simulate(args, doc, out):
    rho, sigma = _pair(args, doc)
    cfg = simulate.ExperimentConfig(args.trials, args.seed, args.prior, args.copies)
    result = simulate.run_product_strategy(rho, sigma, args.eps, args.copies, cfg)
    d = asym.exponent_asym(rho, sigma, args.tol)
    exact = {"alpha_bar": args.eps, "beta_bar": 2.0 ** -asym.neg_log2_beta_ncopy(d, args.eps, args.copies)}
    out.write(simulate.to_csv(simulate.CSV_HEADER, simulate.experiment_rows(result, exact)))
    return 0


def cmd_scan(args, doc, out):
    rho, sigma = _pair(args, doc)
    rows = simulate.exponent_scan(rho, sigma, args.eps, range(1, args.n_max + 1))
    out.write(simulate.to_csv(("n", "exponent", "lower", "upper"), [(r.n, r.exponent, r.lower, r.upper) for r in rows]))
    return 0


def cmd_verify(args, doc, out):
    rho, sigma = _pair(args, doc)
    if args.eps is not None:
        closed = asym.postselected_beta(rho, sigma, args.eps, args.tol, with_povm=False).beta_bar
        povm = asym.optimal_povm_asym(rho, sigma, args.eps, args.tol)
        achieved = oracle.conditional_errors(povm, rho, sigma).beta_bar
        found = oracle.converse_search(rho, sigma, eps=args.eps, trials=args.trials, seed=args.seed).best
    else:
        wp = divergence.WeightedPair(rho, sigma, args.p)
        closed = sym.postselected_perr(wp, args.tol, with_povm=False).perr_bar
        povm = sym.optimal_povm_sym(wp, args.tol)
        achieved = oracle.conditional_errors(povm, rho, sigma).perr_bar(args.p)
        found = oracle.converse_search(rho, sigma, p=args.p, trials=args.trials, seed=args.seed).best
    checks = {
        "achievability": {"pass": abs(achieved - closed) <= 1e-9, "closed_form": closed, "achieved": achieved},
        "converse": {"pass": found >= closed - 1e-12, "closed_form": closed, "best_sampled": found},
    }
    if args.json:
        _emit(args, checks, out)
    else:
        for name, c in checks.items():
            detail = ", ".join(f"{k} = {_human(v)}" for k, v in c.items() if k != "pass")
            out.write(f"{'PASS' if c['pass'] else 'FAIL'} {name}: {detail}\n")
    return 0 if all(c["pass"] for c in checks.values()) else 2


def cmd_gpt(args, doc, out):
    x, y = doc.gpt_state(args.x), doc.gpt_state(args.y)
    op = args.gpt_command
    if op == "dmax":
        res = {"dmax": gpt.cone_dmax(x, y, args.tol)}
    elif op == "omega":
        res = {"omega": gpt.cone_omega(x, y, args.tol)}
    elif op == "xi":
        res = {"xi": gpt.cone_xi_weighted(x, y, 0.5, args.tol)}
    elif op == "beta":
        res = {"beta_bar": gpt.cone_postselected_beta(x, y, args.eps, args.tol)}
    elif op == "perr":
        res = {"perr_bar": gpt.cone_postselected_perr(x, y, args.p, args.tol)}
    else:
        lhs, rhs = gpt.cone_additivity_check(x, y, args.n, args.tol)
        res = {"lhs": lhs, "rhs": rhs}
    _emit(args, res, out)
    return 0



def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="support tolerance (default 1e-10)")

    parser = _Parser(prog="postselect", description="Postselected quantum hypothesis testing.")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL, help="support tolerance (default 1e-10)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text, pair=True):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("file")
        if pair:
            p.add_argument("--rho", default="rho")
            p.add_argument("--sigma", default="sigma")
        p.set_defaults(func=func)
        return p

    for name in ("dmax", "omega", "xi"):
        add(name, cmd_divergence, f"{name} of a state pair")
    p = add("asym", cmd_asym, "optimal conditional type II error")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--povm-out")
    p = add("sym", cmd_sym, "optimal conditional average error")
    p.add_argument("--p", type=float, default=0.5)
    p = add("composite", cmd_composite, "error against a convex set of states", pair=False)
    p.add_argument("--rho", default="rho")
    p.add_argument("--set", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p = add("channel", cmd_channel, "channel discrimination", pair=False)
    p.add_argument("--m", required=True)
    p.add_argument("--n", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--eps", type=float)
    g.add_argument("--p", type=float)
    p.add_argument("--copies", type=int, default=1)
    p = add("simulate", cmd_simulate, "Monte Carlo run of the product strategy (CSV)")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--copies", type=int, default=1)
    p.add_argument("--prior", type=float, default=0.5, help="probability that the source emits rho")
    p = add("scan", cmd_scan, "exact exponent scan (CSV)")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p = add("verify", cmd_verify, "achievability and converse checks")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--eps", type=float)
    g.add_argument("--p", type=float)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("gpt", parents=[common], help="cone-ordered computations")
    gsub = p.add_subparsers(dest="gpt_command", required=True, parser_class=_Parser)
    for name in ("dmax", "omega", "xi", "beta", "perr", "additivity"):
        q = gsub.add_parser(name, parents=[common])
        q.add_argument("file")
        q.add_argument("--x", required=True)
        q.add_argument("--y", required=True)
        if name == "beta":
            q.add_argument("--eps", type=float, required=True)
        if name == "perr":
            q.add_argument("--p", type=float, default=0.5)
        if name == "additivity":
            q.add_argument("--n", type=int, default=2)
        q.set_defaults(func=cmd_gpt)
    return parser


def _diagnose(kind: str, exc: Exception, err) -> None:
    err.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}) + "\n")


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        doc = load_document(args.file)
        return args.func(args, doc, out)
    except SystemExit as exc:
        # --help
        return int(exc.code or 0)
    except ValidationError as exc:
        _diagnose("usage" if isinstance(exc, UsageError) else "validation", exc, err)
        return 1
    except ComputationError as exc:
        _diagnose("computation", exc, err)
        return 2
    except PostselectError as exc:
        _diagnose("error", exc, err)
        return 2


if __name__ == "__main__":
    sys.exit(main())
