"""Command-line entry point: tomodual {state,tomogram,dualpoly,expect,verify}.

Every command accepts --output-dir, --format {csv,json}, --seed and --config
(a JSON file shaped like JobConfig; flags given on the command line win).

Exit codes: 0 ok, 2 config, 3 numerics domain, 4 calibration, 5 verification.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .charfunc import CharFunction, DomainError, NumericalDerivativeError, parseval_pair
from .dual import (CalibrationError, ConditioningError, ContinuationError, ConventionReport,
                   GridDecayError, calibrate_convention, default_calibration_states,
                   regularized_pairing, resolvent_fourier_check)
from .expectation import RouteGrids, cross_validate, reports_to_csv, reports_to_json
from .fock import InvalidDimensionError, TruncationError, make_state, trace_pair
from .tomogram import (DecayError, phase_grid, tomogram_direct, tomogram_from_charfunc,
                       tomogram_radon, wigner_from_fock)
from .trigpoly import MAX_DEGREE, biorthogonal_Q, biorthogonal_Qtilde, verify_reference_table

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_CALIBRATION, EXIT_VERIFY = 0, 2, 3, 4, 5


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- configuration

STATE_PARAMS = {
    "fock": {"n"},
    "coherent": {"alpha"},
    "thermal": {"nbar"},
    "squeezed": {"r", "theta"},
    "cat": {"alpha", "parity"},
}


@dataclass
class StateSpec:
    kind: str = "fock"
    N: int = 40
    params: dict = field(default_factory=dict)

    def validate(self, path="state"):
        if self.kind not in STATE_PARAMS:
            raise ConfigError(f"{path}.kind: unknown state kind {self.kind!r}")
        if not isinstance(self.N, int) or self.N < 2:
            raise ConfigError(f"{path}.N: must be an integer >= 2")
        for k in self.params:
            if k not in STATE_PARAMS[self.kind]:
                raise ConfigError(f"{path}.params.{k}: not a parameter of kind {self.kind!r}")

    def build(self, N=None):
        params = dict(self.params)
        if "alpha" in params:
            params["alpha"] = _complex(params["alpha"])
        return make_state(self.kind, N or self.N, **params)


def _complex(v):
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(str(v).replace(" ", "")) if isinstance(v, str) else complex(v)


@dataclass
class GridSpec:
    x_range: float = 10.0
    x_points: int = 641
    phases: int = 128
    t_range: float = 40.0
    t_points: int = 4097
    qp_range: float = 10.0
    qp_points: int = 321

    def validate(self, path="grid"):
        for name in ("x_points", "t_points", "qp_points"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 3 or v % 2 == 0:
                raise ConfigError(f"{path}.{name}: must be an odd integer >= 3")
        if not isinstance(self.phases, int) or self.phases < 2 or self.phases % 2:
            raise ConfigError(f"{path}.phases: must be an even integer >= 2")
        for name in ("x_range", "t_range", "qp_range"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{path}.{name}: must be > 0")

    def route_grids(self) -> RouteGrids:
        return RouteGrids(
            X=np.linspace(-self.x_range, self.x_range, self.x_points),
            phi=phase_grid(self.phases),
            t=np.linspace(-self.t_range, self.t_range, self.t_points),
            qp=np.linspace(-self.qp_range, self.qp_range, self.qp_points),
        )


@dataclass
class ToleranceSpec:
    deterministic: float = 1e-5
    sampled_sigmas: float = 4.0
    calibration: float = 1e-5
    trend_margin: float = 0.1
    parseval: float = 1e-6


def _default_pairs():
    vac = {"kind": "fock", "params": {"n": 0}}
    return [
        {"state": vac, "observable": vac},
        {"state": {"kind": "coherent", "params": {"alpha": 1.0}}, "observable": vac},
    ]


def _default_parseval_states():
    return [
        {"kind": "fock", "params": {"n": 0}},
        {"kind": "fock", "params": {"n": 1}},
        {"kind": "coherent", "params": {"alpha": 1.0}},
        {"kind": "coherent", "params": {"alpha": "1j"}},
        {"kind": "thermal", "params": {"nbar": 0.5}},
        {"kind": "squeezed", "params": {"r": 0.5}},
    ]


@dataclass
class VerifySpec:
    checks: list = field(default_factory=lambda: ["pairing", "resolvent", "parseval"])
    epsilons: list = field(default_factory=lambda: [0.4, 0.2, 0.1])
    ts: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    phis: list = field(default_factory=lambda: [0.0, float(np.pi / 3)])
    negative_t: float = -1.0
    negative_t_bound: float = 1e-3
    N: int = 64
    pairs: list = field(default_factory=_default_pairs)
    parseval_states: list = field(default_factory=_default_parseval_states)

    def validate(self, path="verify"):
        bad = set(self.checks) - {"pairing", "resolvent", "parseval"}
        if bad:
            raise ConfigError(f"{path}.checks: unknown check(s) {sorted(bad)}")
        if any(not e > 0 for e in self.epsilons):
            raise ConfigError(f"{path}.epsilons: every epsilon must be > 0")
        for i, pair in enumerate(self.pairs):
            for key in pair:
                if key not in ("state", "observable"):
                    raise ConfigError(f"{path}.pairs[{i}].{key}: unknown key")
            for key in ("state", "observable"):
                _state_spec(pair.get(key, {}), f"{path}.pairs[{i}].{key}", self.N)
        for i, s in enumerate(self.parseval_states):
            _state_spec(s, f"{path}.parseval_states[{i}]", 40)


def _state_spec(d, path, N):
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: expected an object")
    for key in d:
        if key not in ("kind", "N", "params"):
            raise ConfigError(f"{path}.{key}: unknown key")
    spec = StateSpec(d.get("kind", "fock"), d.get("N", N), dict(d.get("params", {})))
    spec.validate(path)
    return spec


@dataclass
class JobConfig:
    state: StateSpec = field(default_factory=StateSpec)
    grid: GridSpec = field(default_factory=GridSpec)
    tol: ToleranceSpec = field(default_factory=ToleranceSpec)
    verify: VerifySpec = field(default_factory=VerifySpec)
    seed: int = 0
    output_dir: str = "."
    format: str = "csv"
    route: str = "fourier"
    wigner: bool = False
    max_order: int = 2
    shots: int = 0
    degree: int = 2
    calibration_N: int = 40

    def validate(self):
        self.state.validate()
        self.grid.validate()
        self.verify.validate()
        if self.format not in ("csv", "json"):
            raise ConfigError("format: must be 'csv' or 'json'")
        if self.route not in ("fourier", "radon", "direct"):
            raise ConfigError("route: must be one of fourier, radon, direct")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed: must be a nonnegative integer")
        if not isinstance(self.max_order, int) or not 0 <= self.max_order <= 8:
            raise ConfigError("max_order: must be an integer in [0, 8]")
        if not isinstance(self.shots, int) or self.shots < 0:
            raise ConfigError("shots: must be a nonnegative integer")
        if not isinstance(self.degree, int) or not 0 <= self.degree <= MAX_DEGREE:
            raise ConfigError(f"degree: must be an integer in [0, {MAX_DEGREE}]")
        return self


def _from_dict(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    names = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, val in data.items():
        where = f"{path}.{key}" if path else key
        if key not in names:
            raise ConfigError(f"{where}: unknown key")
        sub = _NESTED.get((cls, key))
        kwargs[key] = _from_dict(sub, val, where) if sub else val
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{path or 'config'}: {exc}") from None


_NESTED = {(JobConfig, "state"): StateSpec, (JobConfig, "grid"): GridSpec,
           (JobConfig, "tol"): ToleranceSpec, (JobConfig, "verify"): VerifySpec}


def load_config(path=None, overrides=None) -> JobConfig:
    data = {}
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config file {path}: {exc}") from None
    for dotted, val in (overrides or {}).items():
        node = data
        *head, last = dotted.split(".")
        for h in head:
            node = node.setdefault(h, {})
        node[last] = val
    return _from_dict(JobConfig, data, "").validate()


# ---------------------------------------------------------------- output helpers

def _out(cfg: JobConfig) -> Path:
    d = Path(cfg.output_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for r in rows:
            wr.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def _grid_json(arr):
    a = np.asarray(arr)
    return {"min": float(a[0]), "max": float(a[-1]), "points": int(a.size)}


# ---------------------------------------------------------------- commands

def cmd_state(cfg: JobConfig) -> int:
    rho = cfg.state.build()
    d = _out(cfg)
    m = rho.matrix
    _write_json(d / "state.json", {
        "kind": cfg.state.kind, "params": cfg.state.params, "dim": rho.dim,
        "entries": [[[float(v.real), float(v.imag)] for v in row] for row in m],
    })
    summary = {"label": rho.label, "dim": rho.dim, "purity": rho.purity, "tail_mass": rho.tail_mass,
               "trace": float(np.trace(m).real)}
    _write_json(d / "state_summary.json", summary)
    print(f"{rho.label}: dim={rho.dim} purity={rho.purity:.12g} tail_mass={rho.tail_mass:.3e}")
    return EXIT_OK


def cmd_tomogram(cfg: JobConfig) -> int:
    rho = cfg.state.build()
    g = cfg.grid.route_grids()
    F = CharFunction(rho)
    if cfg.route == "direct":
        w = tomogram_direct(rho, g.X, g.phi)
    else:
        w = tomogram_from_charfunc(F, g.X, g.phi, g.t)
    diff = None
    W = None
    if cfg.route == "radon" or cfg.wigner:
        W = wigner_from_fock(rho, g.qp, g.qp)
    if cfg.route == "radon":
        ref = w
        w = tomogram_radon(W, g.X, g.phi)
        diff = float(np.max(np.abs(w.values - ref.values)))
    d = _out(cfg)
    inv = w.invariants()
    if cfg.format == "csv":
        Xg, Pg = np.meshgrid(w.X, w.phi, indexing="ij")
        _write_csv(d / "tomogram.csv", ("X", "phi", "w"),
                   zip(Xg.ravel(), Pg.ravel(), w.values.ravel()))
        if W is not None and cfg.wigner:
            Qg, Pq = np.meshgrid(W.q, W.p, indexing="ij")
            _write_csv(d / "wigner.csv", ("q", "p", "W"), zip(Qg.ravel(), Pq.ravel(), W.values.ravel()))
    meta = {"state": rho.label, "route": cfg.route, "X": _grid_json(w.X),
            "phi": {"points": int(w.phi.size), "spacing": "2 pi k / M"},
            "t": _grid_json(g.t), "invariants": inv}
    if diff is not None:
        meta["max_abs_diff_vs_fourier"] = diff
    if cfg.format == "json":
        meta["values"] = w.values.tolist()
        meta["X_values"] = w.X.tolist()
        meta["phi_values"] = w.phi.tolist()
        if W is not None and cfg.wigner:
            meta["wigner"] = {"q": W.q.tolist(), "p": W.p.tolist(), "values": W.values.tolist()}
    _write_json(d / "tomogram.json", meta)
    print(f"normalization residual: {inv['normalization']:.3e}")
    print(f"minimum value: {inv['min_value']:.3e}  pi-shift residual: {inv['pi_shift']:.3e}")
    if diff is not None:
        print(f"max |radon - fourier|: {diff:.3e}")
    return EXIT_OK


def cmd_dualpoly(cfg: JobConfig) -> int:
    n = cfg.degree
    d = _out(cfg)
    out = {"degree": n, "basis": "(1/pi) sum_k c_k sin^k(phi) cos^(n-k)(phi)",
           "Q": [q.to_json() for q in biorthogonal_Q(n)],
           "Qtilde": [q.to_json() for q in biorthogonal_Qtilde(n)],
           "Q_text": [str(q) for q in biorthogonal_Q(n)]}
    report = verify_reference_table()
    if n <= 2:
        out["reference_table"] = report.to_json()
    _write_json(d / f"dualpoly_n{n}.json", out)
    if cfg.format == "csv":
        rows = [(n, m, k, f"{c.numerator}/{c.denominator}")
                for m, q in enumerate(biorthogonal_Q(n)) for k, c in enumerate(q.coeffs)]
        _write_csv(d / f"dualpoly_n{n}.csv", ("n", "m", "k", "coefficient"), rows)
    for m, q in enumerate(biorthogonal_Q(n)):
        print(f"Q_{n}^{m} = {q}")
    if n <= 2:
        print(report.summary())
    return EXIT_OK


def _calibration_key(cfg: JobConfig) -> str:
    relevant = {"N": cfg.calibration_N, "grid": dataclasses.asdict(cfg.grid),
                "tol": cfg.tol.calibration, "max_order": 3}
    return hashlib.sha256(json.dumps(relevant, sort_keys=True).encode()).hexdigest()[:16]


def get_convention(cfg: JobConfig) -> ConventionReport:
    d = _out(cfg)
    path = d / f"convention_{_calibration_key(cfg)}.json"
    if path.exists():
        return ConventionReport.from_json(json.loads(path.read_text()))
    g = cfg.grid.route_grids()
    states = default_calibration_states(cfg.calibration_N)
    tomos = [tomogram_from_charfunc(CharFunction(s), g.X, g.phi, g.t) for s in states]
    rep = calibrate_convention(cfg.calibration_N, states, 3, cfg.tol.calibration, tomos)
    _write_json(path, rep.to_json())
    return rep


def cmd_expect(cfg: JobConfig) -> int:
    conv = get_convention(cfg)
    rho = cfg.state.build()
    reports = cross_validate(rho, cfg.max_order, conv, cfg.grid.route_grids(),
                             shots=cfg.shots, seed=cfg.seed)
    d = _out(cfg)
    if cfg.format == "csv":
        (d / "expect.csv").write_text(reports_to_csv(reports))
    else:
        (d / "expect.json").write_text(reports_to_json(reports) + "\n")
    bad = [r for r in reports if not r.ok]
    for r in reports:
        vals = " ".join(f"{k}={v:.10g}" for k, v in r.values.items())
        print(f"({r.m},{r.n}) {vals} maxdev={r.max_pairwise_deviation:.2e}"
              + (f" FLAGS {r.flags}" if r.flags else ""))
    print(f"{len(reports)} reports, {len(bad)} flagged (convention: index {conv.index_rule}, "
          f"phase {conv.phase_rule})")
    return EXIT_OK if not bad else EXIT_VERIFY


def _decreasing(errs, margin):
    return all(b < (1 - margin) * a for a, b in zip(errs, errs[1:]))


def cmd_verify(cfg: JobConfig) -> int:
    v = cfg.verify
    d = _out(cfg)
    margin = cfg.tol.trend_margin
    ok = True
    summary = {}
    if "pairing" in v.checks:
        for i, pair in enumerate(v.pairs):
            rho = _state_spec(pair["state"], "", v.N).build(v.N)
            A = _state_spec(pair["observable"], "", v.N).build(v.N)
            target = trace_pair(rho, A).real
            rows = []
            for eps in v.epsilons:
                P = regularized_pairing(rho, A, eps)
                rows.append((eps, P.real, target, abs(P - target)))
            trend = _decreasing([r[3] for r in rows], margin)
            ok &= trend
            name = f"pairing_{i}"
            summary[name] = {"state": rho.label, "observable": A.label, "decreasing": trend,
                             "rows": [list(r) for r in rows]}
            _write_csv(d / f"{name}.csv", ("epsilon", "pairing", "target", "abs_error"), rows)
            print(f"pairing {rho.label} vs {A.label}: errors "
                  + ", ".join(f"{r[3]:.4g}" for r in rows) + f" -> {'PASS' if trend else 'FAIL'}")
    if "resolvent" in v.checks:
        A = make_state("fock", v.N, n=0)
        rows = []
        for t in v.ts:
            for phi in v.phis:
                errs = []
                for eps in v.epsilons:
                    lhs, rhs = resolvent_fourier_check(A, t, phi, eps)
                    errs.append(abs(lhs - rhs))
                    rows.append((t, phi, eps, lhs.real, lhs.imag, rhs.real, rhs.imag, errs[-1]))
                trend = _decreasing(errs, margin)
                ok &= trend
                print(f"resolvent t={t:g} phi={phi:.4f}: errors "
                      + ", ".join(f"{e:.4g}" for e in errs) + f" -> {'PASS' if trend else 'FAIL'}")
        _, rhs = resolvent_fourier_check(A, v.negative_t, 0.0, min(v.epsilons))
        neg_ok = abs(rhs) < v.negative_t_bound
        ok &= neg_ok
        rows.append((v.negative_t, 0.0, min(v.epsilons), float("nan"), float("nan"),
                     rhs.real, rhs.imag, abs(rhs)))
        print(f"resolvent t={v.negative_t:g}: |rhs| = {abs(rhs):.3e} -> {'PASS' if neg_ok else 'FAIL'}")
        _write_csv(d / "resolvent_fourier.csv",
                   ("t", "phi", "epsilon", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_error"), rows)
        summary["resolvent"] = {"negative_t_rhs": abs(rhs)}
    if "parseval" in v.checks:
        specs = [_state_spec(s, "", 40) for s in v.parseval_states]
        states = [s.build() for s in specs]
        Fs = [CharFunction(s) for s in states]
        rows = []
        for i in range(len(states)):
            for j in range(i, len(states)):
                res = parseval_pair(Fs[i], Fs[j])
                val = 2 * np.pi * res.value.real
                tgt = trace_pair(states[i], states[j]).real
                rows.append((states[i].label, states[j].label, val, tgt, abs(val - tgt)))
        good = all(r[4] <= cfg.tol.parseval for r in rows)
        ok &= good
        _write_csv(d / "parseval.csv", ("state_a", "state_b", "pairing", "target", "abs_error"), rows)
        print(f"parseval: max |2 pi * pairing - Tr| = {max(r[4] for r in rows):.3e} "
              f"-> {'PASS' if good else 'FAIL'}")
    _write_json(d / "verify.json", summary)
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {"state": cmd_state, "tomogram": cmd_tomogram, "dualpoly": cmd_dualpoly,
            "expect": cmd_expect, "verify": cmd_verify}


# ---------------------------------------------------------------- argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=int)
    common.add_argument("--config", help="JSON file with JobConfig fields")

    state = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    state.add_argument("--kind", "--state", dest="state.kind",
                       help="fock, coherent, thermal, squeezed or cat (vacuum = fock n 0)")
    state.add_argument("--dim", "-N", dest="state.N", type=int)
    state.add_argument("--n", dest="state.params.n", type=int)
    state.add_argument("--alpha", dest="state.params.alpha", type=str)
    state.add_argument("--nbar", dest="state.params.nbar", type=float)
    state.add_argument("--r", dest="state.params.r", type=float)
    state.add_argument("--theta", dest="state.params.theta", type=float)
    state.add_argument("--parity", dest="state.params.parity", type=int)

    p = argparse.ArgumentParser(prog="tomodual", description="Optical tomograms and dual symbols.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("state", parents=[common, state], argument_default=argparse.SUPPRESS,
                   help="write a density matrix")
    t = sub.add_parser("tomogram", parents=[common, state], argument_default=argparse.SUPPRESS,
                       help="write a tomogram grid")
    t.add_argument("--route", choices=("fourier", "radon", "direct"))
    t.add_argument("--wigner", action="store_true", default=argparse.SUPPRESS)
    dp = sub.add_parser("dualpoly", parents=[common], argument_default=argparse.SUPPRESS,
                        help="write exact Q_n^m coefficients")
    dp.add_argument("--degree", "-n", dest="degree", type=int)
    e = sub.add_parser("expect", parents=[common, state], argument_default=argparse.SUPPRESS,
                       help="cross-validate moments")
    e.add_argument("--max-order", dest="max_order", type=int)
    e.add_argument("--shots", type=int)
    vp = sub.add_parser("verify", parents=[common], argument_default=argparse.SUPPRESS,
                        help="epsilon-trend and Parseval checks")
    vp.add_argument("--checks", dest="verify.checks", nargs="+",
                    choices=("pairing", "resolvent", "parseval"))
    return p


def _overrides(ns: argparse.Namespace) -> dict:
    out = {}
    for k, v in vars(ns).items():
        if k in ("command", "config"):
            continue
        if k == "state.kind" and v == "vacuum":
            out["state.kind"] = "fock"
            out.setdefault("state.params.n", 0)
            continue
        out[k] = v
    return out


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = load_config(getattr(ns, "config", None), _overrides(ns))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[ns.command](cfg)
    except CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        if exc.report is not None:
            for (j, e), r in sorted(exc.report.residuals.items()):
                print(f"  index={j:<3} phase={e:<4} max residual={r:.3e}", file=sys.stderr)
        return EXIT_CALIBRATION
    except (DecayError, DomainError, TruncationError, InvalidDimensionError, GridDecayError,
            ConditioningError, ContinuationError, NumericalDerivativeError) as exc:
        print(f"numerics error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
