"""
Experiment orchestration and machine-readable reports.

A run takes a config dict (usually loaded from JSON) and returns a report
dict plus an exit status: 0 when every verdict passes, 1 when a
mathematical verdict fails, 2 for invalid input. Reports serialise
complex numbers as ``[re, im]`` pairs and matrices as row-major nested
lists, with sorted keys, so identical configs give identical bytes.
Wall-clock time is kept out of the report and written to a separate
``timing.json``.

Config keys
-----------
command     one of ``COMMANDS``
seed        integer, default 0
dims        ``{"d_H", "m", "N", "degree", "steps", "lam"}``, all optional
tolerance   ``{"rank_eps", "residual_eps", "tol"}``, all optional
instance    ``{"kind": ...}`` or explicit matrices (``T``; ``u`` and ``delta``;
            ``kraus`` and ``delta``)
"""

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .charfun import (beurling_residual, certified_headroom, default_degree, embed_C,
                      inner_defect, intertwining_residual, limit_product_What,
                      model_map_W, theta_coefficients)
from .cocycle import (ToyCocycle, compress_Z, convergence_analyze, exactness_residual,
                      gauge_modify, gauge_unitary, ergodic_chain, vacuum_unit)
from .contraction import defect_data, star_stability, validate_contraction
from .cpmaps import KrausMap, equivalence_report
from .dilation import DilationVector, power_factorization_residual
from .errors import BadDims, BeurlingLabError
from .instances import generate_instance, rng_for
from .numeric import Tolerance, opnorm, unitarity_defect

__all__ = ["COMMANDS", "REPORT_SCHEMA", "run", "run_files", "run_batch",
           "to_json", "from_json", "curves_csv", "load_config"]

COMMANDS = ("charfun", "dilate", "limit", "beurling1", "cpcheck", "cocycle", "thm42")

DEFAULT_KIND = {
    "charfun": "star_stable", "dilate": "random_contraction", "limit": "star_stable",
    "beurling1": "star_stable", "cpcheck": "amplitude_damping",
    "cocycle": "amplitude_damping", "thm42": "amplitude_damping",
}

_number = {"type": ["number", "null"]}
_value = {"anyOf": [_number, {"type": "boolean"}, {"type": "string"},
                    {"type": "array"}]}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["tool", "version", "command", "seed", "status", "exit_status",
                 "verdicts", "residuals", "values", "curves", "instance", "config"],
    "additionalProperties": False,
    "properties": {
        "tool": {"const": "beurlinglab"},
        "version": {"type": "string"},
        "command": {"enum": list(COMMANDS) + [None]},
        "seed": {"type": ["integer", "null"]},
        "status": {"enum": ["pass", "fail", "invalid"]},
        "exit_status": {"enum": [0, 1, 2]},
        "error": {"type": "string"},
        "verdicts": {"type": "object", "additionalProperties": {"type": "boolean"}},
        "residuals": {"type": "object", "additionalProperties": _number},
        "values": {"type": "object", "additionalProperties": _value},
        "curves": {"type": "object",
                   "additionalProperties": {"type": "array", "items": _number}},
        "instance": {"type": "object"},
        "config": {"type": "object"},
    },
}


# -- serialisation -------------------------------------------------------------

def _plain(x):
    """Convert numpy/complex data to JSON-ready values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_plain(float(x.real)), _plain(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else None
    return x


def to_json(obj):
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def from_json(data):
    """Nested lists whose innermost items are ``[re, im]`` pairs -> complex array."""
    a = np.asarray(data, dtype=float)
    if a.ndim == 0 or a.shape[-1] != 2:
        raise ValueError("complex entries must be [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def curves_csv(curves):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "quantity", "value"])
    for name in sorted(curves):
        for step, v in enumerate(curves[name]):
            w.writerow([step, name, repr(float(v))])
    return buf.getvalue()


def load_config(path):
    with open(path) as fh:
        return json.load(fh)


# -- config parsing ------------------------------------------------------------

def _dims(cfg):
    dims = dict(cfg.get("dims") or {})
    for key in ("d_H", "m", "N", "degree", "steps"):
        if key in dims:
            v = dims[key]
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise BadDims(f"dims.{key} must be a positive integer, got {v!r}")
    if "lam" in dims and not 0.0 < float(dims["lam"]) < 1.0:
        raise BadDims("dims.lam must lie in (0, 1)")
    return dims


def _tolerances(cfg):
    t = dict(cfg.get("tolerance") or {})
    tol = Tolerance(float(t.get("rank_eps", 1e-9)), float(t.get("residual_eps", 1e-8)))
    cert = float(t.get("tol", 1e-6))
    if not 0.0 < cert < 1.0:
        raise ValueError("tolerance.tol must lie in (0, 1)")
    return tol, cert


class _Ctx:
    def __init__(self, cfg):
        self.command = cfg["command"]
        self.seed = int(cfg.get("seed", 0))
        self.dims = _dims(cfg)
        self.tol, self.cert = _tolerances(cfg)
        self.inst = dict(cfg.get("instance") or {})
        self.kind = self.inst.get("kind", DEFAULT_KIND[self.command])
        self.rng = rng_for(self.seed, "probe")

    def contraction(self):
        if "T" in self.inst:
            T = from_json(self.inst["T"])
            echo = {"kind": "explicit"}
        else:
            if self.kind not in ("random_contraction", "star_stable", "unitary"):
                raise BadDims(f"instance kind {self.kind!r} does not give a contraction")
            T = generate_instance(self.kind, self.seed, self.dims)["T"]
            echo = {"kind": self.kind}
        dd = defect_data(validate_contraction(T, self.tol), self.tol)
        echo["T"] = T
        return dd, echo

    def cocycle(self):
        N = int(self.dims.get("N", 40 if self.kind == "amplitude_damping" else 20))
        if "u" in self.inst:
            u = from_json(self.inst["u"])
            delta = from_json(self.inst["delta"])
            d = int(self.dims.get("d_H", len(delta)))
            m = int(self.dims.get("m", u.shape[0] // max(d, 1)))
            c = ToyCocycle(u, d, m, N, delta, self.tol)
            echo = {"kind": "explicit"}
        else:
            if self.kind not in ("amplitude_damping", "random_cocycle", "nonergodic_cocycle"):
                raise BadDims(f"instance kind {self.kind!r} does not give a cocycle")
            inst = generate_instance(self.kind, self.seed, dict(self.dims, N=N))
            c = inst["cocycle"]
            if c.tol != self.tol:
                c = ToyCocycle(c.u, c.d, c.m, c.N, c.delta, self.tol)
            echo = {"kind": self.kind}
        echo.update(u=c.u, delta=c.delta, d_H=c.d, m=c.m, N=c.N)
        return c, echo


def _random_vector(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


# -- commands ------------------------------------------------------------------

def _cmd_charfun(ctx):
    dd, echo = ctx.contraction()
    stab = star_stability(dd.contraction, tol=ctx.tol)
    if not stab.is_star_stable:
        raise BadDims("charfun needs a *-stable contraction (spectral radius < 1)")
    N = int(ctx.dims.get("degree", default_degree(dd)))
    cf = theta_coefficients(dd, N)
    zs = np.exp(2j * np.pi * ctx.rng.uniform(size=20))
    inner = inner_defect(dd, zs, N)
    h = _random_vector(ctx.rng, dd.dim)
    h /= np.linalg.norm(h)
    emb = embed_C(dd, h, N)
    iso = abs(np.linalg.norm(emb.coeffs) - 1.0)
    # headroom probe: f of low degree, output degree N
    f = _random_vector(ctx.rng, (min(4, N - 1), dd.defect_dim))
    v = DilationVector.make(h, f, N=N)
    inter = intertwining_residual(dd, v, N)
    # C H is orthogonal to Theta H^2(D)
    Cm = np.array([embed_C(dd, e, N).coeffs.ravel() for e in np.eye(dd.dim)]).T
    Wf, _ = model_map_W(dd, DilationVector.make(np.zeros(dd.dim), f, N=N), N)
    ortho = float(np.linalg.norm(Cm.conj().T @ Wf.ravel()))
    tol = ctx.tol.residual_eps
    return {
        "verdicts": {"inner": inner <= 100 * tol, "isometry_C": iso <= tol,
                     "intertwining": inter <= tol, "orthogonality": ortho <= tol},
        "residuals": {"inner_defect": inner, "isometry_C": iso,
                      "intertwining": inter, "orthogonality": ortho,
                      "tail_bound": emb.tail_bound},
        "values": {"degree": N, "spectral_radius": stab.spectral_radius,
                   "theta_head": cf.coeffs[:min(N, 4)]},
        "curves": {"theta_norm": [opnorm(t) for t in cf.coeffs]},
        "instance": echo,
    }


def _cmd_dilate(ctx):
    dd, echo = ctx.contraction()
    steps = int(ctx.dims.get("steps", 8))
    N = int(ctx.dims.get("N", 2 * steps + 4))
    fdeg = max(N - steps, 1)
    rot = unitarity_defect(dd.R)
    res = []
    for n in range(1, steps + 1):
        h = _random_vector(ctx.rng, dd.dim)
        f = _random_vector(ctx.rng, (fdeg, dd.defect_dim)) if dd.defect_dim else None
        v = DilationVector.make(h, f, N=N, r=dd.defect_dim)
        res.append(power_factorization_residual(dd, n, v))
    worst = float(max(res))
    return {
        "verdicts": {"rotation_unitary": rot <= 1e-10, "power_factorization": worst <= 1e-10},
        "residuals": {"rotation_unitarity": rot, "power_factorization": worst},
        "values": {"defect_dim": dd.defect_dim, "steps": steps, "N": N},
        "curves": {"factorization_residual": res},
        "instance": echo,
    }


def _cmd_limit(ctx):
    dd, echo = ctx.contraction()
    steps = int(ctx.dims.get("steps", 200))
    h = _random_vector(ctx.rng, dd.dim)
    h /= np.linalg.norm(h)
    v = DilationVector.make(h, None, N=steps, r=dd.defect_dim)
    lp = limit_product_What(dd, steps, v)
    ts = dd.T.conj().T
    x = h.copy()
    direct = []
    for _ in range(steps):
        x = ts @ x
        direct.append(np.linalg.norm(x))
    hmatch = float(np.max(np.abs(lp.h_norms - np.asarray(direct))))
    burn = min(steps - 1, dd.dim)
    tail = lp.errors[burn:]
    monotone = bool(np.all(np.diff(tail) <= 1e-14))
    final = float(lp.errors[-1])
    verdicts = {"h_norm_match": hmatch <= 1e-10,
                "induction_display": lp.induction_residual <= 1e-10}
    if lp.converges:
        verdicts.update(final_error=final <= 1e-8, monotone=monotone)
    return {
        "verdicts": verdicts,
        "residuals": {"final_error": final, "h_norm_match": hmatch,
                      "induction_residual": lp.induction_residual},
        "values": {"constant": lp.constant, "star_stable": lp.converges, "steps": steps},
        "curves": {"error": lp.errors, "h_norm": lp.h_norms},
        "instance": echo,
    }


def _cmd_beurling1(ctx):
    dd, echo = ctx.contraction()
    low = int(ctx.dims.get("degree", 20))
    N = int(ctx.dims.get("N", low + certified_headroom(dd, ctx.cert)))
    res = beurling_residual(dd, N, low)
    nilpotent = opnorm(np.linalg.matrix_power(dd.T, dd.dim)) <= ctx.tol.rank_eps
    bound = 1e-10 if nilpotent else ctx.cert
    return {
        "verdicts": {"beurling_subspace": res <= bound},
        "residuals": {"principal_angle": res},
        "values": {"N": N, "low_degree": low, "nilpotent": bool(nilpotent),
                   "threshold": bound},
        "curves": {},
        "instance": echo,
    }


def _cmd_cpcheck(ctx):
    if "kraus" in ctx.inst:
        Z = KrausMap(from_json(ctx.inst["kraus"]), ctx.tol)
        delta = from_json(ctx.inst["delta"])
        echo = {"kind": "explicit"}
    else:
        c, _ = ctx.cocycle()
        Z, delta = compress_Z(c), c.delta
        echo = {"kind": ctx.kind}
    echo.update(kraus=Z.ops, delta=delta)
    rep = equivalence_report(Z, delta, tol=ctx.tol, atol=ctx.cert)
    verdicts = {"agreement": rep.agree, "monotone": rep.monotone_slack >= -1e-9}
    if rep.is_ergodic:
        verdicts["limit_identity"] = rep.limit_defect <= 10 * ctx.cert
    return {
        "verdicts": verdicts,
        "residuals": {"monotone_slack": rep.monotone_slack,
                      "limit_defect": rep.limit_defect,
                      "limit_fixed_defect": rep.limit_fixed_defect},
        "values": {"absorbing": rep.is_absorbing, "ergodic": rep.is_ergodic,
                   "fixed_space_dim": rep.fixed_space_dim,
                   "indeterminate": rep.indeterminate},
        "curves": {"absorption": rep.convergence_curve},
        "instance": echo,
    }


def _cmd_cocycle(ctx):
    c, echo = ctx.cocycle()
    omega = vacuum_unit(c, ctx.tol)
    cg = gauge_modify(c, ctx.tol)
    cert = convergence_analyze(cg, tol=ctx.cert, omega_hat=omega, gauge_v=gauge_unitary(omega))
    verdicts = {"convergent": cert.convergent, "cauchy_bound": cert.cauchy_violation <= 1e-12}
    residuals = {"q_defect": cert.q_defect, "cauchy_violation": cert.cauchy_violation,
                 "final_delta": float(cert.delta_curve[-1])}
    exact = []
    if cert.convergent and cert.q_defect <= ctx.cert:
        exact = [exactness_residual(cg, cert.w_hat, n) for n in range(1, min(5, c.N // 2) + 1)]
        verdicts["exactness"] = max(exact) <= 10 * ctx.cert
        residuals["exactness"] = max(exact)
    return {
        "verdicts": verdicts,
        "residuals": residuals,
        "values": {"omega_hat": omega, "status": cert.status, "burn_in": cert.burn_in,
                   "exactness": exact, "in_range": cert.in_range},
        "curves": {"delta": cert.delta_curve, "increment": cert.increment_curve},
        "instance": echo,
    }


def _cmd_thm42(ctx):
    c, echo = ctx.cocycle()
    ch = ergodic_chain(c, tol=ctx.cert)
    br = ch["beurling"]
    clauses = {k: ch[k] for k in "abcde"}
    residuals = {"q_defect": ch.get("q_defect"), "cauchy_violation": ch.get("cauchy_violation"),
                 "monotone_slack": ch.get("monotone_slack"),
                 "adapted_residual": br.adapted_residual}
    if ch.get("exactness"):
        residuals["exactness"] = max(ch["exactness"])
    values = dict(clauses, omega_hat=ch.get("omega_hat"), notes=br.notes,
                  restriction_pass=br.restriction_pass, conjugacy_pass=br.conjugacy_pass,
                  schmidt_ratio=br.schmidt_ratio, all_pass=all(v is True for v in clauses.values()))
    curves = {}
    if ch.get("delta_curve") is not None:
        curves["delta"] = ch["delta_curve"]
    return {
        "verdicts": {"coherent": bool(ch["coherent"])},
        "residuals": residuals, "values": values, "curves": curves, "instance": echo,
    }


_DISPATCH = {
    "charfun": _cmd_charfun, "dilate": _cmd_dilate, "limit": _cmd_limit,
    "beurling1": _cmd_beurling1, "cpcheck": _cmd_cpcheck, "cocycle": _cmd_cocycle,
    "thm42": _cmd_thm42,
}


# -- entry points ----------------------------------------------------------------

def run(config):
    """Run one experiment. Returns ``(report, exit_status)``."""
    cfg = dict(config or {})
    base = {"tool": "beurlinglab", "version": __version__, "command": cfg.get("command"),
            "seed": cfg.get("seed", 0), "config": cfg, "verdicts": {}, "residuals": {},
            "values": {}, "curves": {}, "instance": {}}
    try:
        if cfg.get("command") not in COMMANDS:
            raise BadDims(f"unknown command {cfg.get('command')!r}")
        if not isinstance(base["seed"], int) or isinstance(base["seed"], bool):
            raise BadDims("seed must be an integer")
        out = _DISPATCH[cfg["command"]](_Ctx(cfg))
    except (BeurlingLabError, ValueError, KeyError, TypeError) as exc:
        # the raw input stays in the config echo
        if base["command"] not in COMMANDS:
            base["command"] = None
        if not isinstance(base["seed"], int) or isinstance(base["seed"], bool):
            base["seed"] = None
        base.update(status="invalid", exit_status=2, error=f"{type(exc).__name__}: {exc}")
        return _plain(base), 2
    base.update(out)
    ok = all(out["verdicts"].values())
    base.update(status="pass" if ok else "fail", exit_status=0 if ok else 1)
    return _plain(base), base["exit_status"]


def run_files(config, out_dir=None, curves=False):
    """Run and write ``report.json``, optional ``curves.csv`` and ``timing.json``."""
    t0 = time.perf_counter()
    report, status = run(config)
    elapsed = time.perf_counter() - t0
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(to_json(report))
        if curves:
            (out / "curves.csv").write_text(curves_csv(report["curves"]))
        (out / "timing.json").write_text(to_json({"wall_clock_s": elapsed}))
    return report, status, elapsed


def _batch_one(args):
    cfg, out_dir, curves = args
    report, status, _ = run_files(cfg, out_dir, curves)
    return status


def run_batch(configs, out_dir, curves=False, workers=None):
    """Run independent configs in worker processes, each into ``out_dir/<index>``."""
    jobs = [(cfg, Path(out_dir) / f"{i:03d}", curves) for i, cfg in enumerate(configs)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_batch_one, jobs))
