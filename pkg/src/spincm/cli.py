"""Command-line front end.

Subcommands: verify | spectrum | eval | special.  Machine-readable JSON
(or CSV for spectrum tables) goes to stdout or --out; a human summary
goes to stderr.  Every flag can be overridden by an environment variable
SPINCM_<FLAG> (uppercase, dashes to underscores) and preset in a simple
"key = value" config file; precedence is flag > environment > file >
default.  Exit codes: 0 success, 1 verification failure, 2 bad
configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from dataclasses import dataclass, fields

from . import __version__
from . import eigen as eg
from . import elliptic as el
from . import spectrum as sp
from . import verify as vf
from .backend import BACKEND
from .oracles import LatticeSumOracle

ENV_PREFIX = "SPINCM_"


class ConfigError(ValueError):
    pass


def parse_complex(text: str) -> complex:
    """Complex literals like '1', '0.3+1.1i', '-2i', 'i' (also 'j')."""
    s = str(text).strip().replace(" ", "").replace("i", "j")
    if not s:
        raise ConfigError("empty complex literal")
    try:
        return complex(s)
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex literal {text!r}") from exc


@dataclass
class RunConfig:
    omega1: complex = 1.0 + 0j
    omega2: complex = 1j
    coupling: float = 1.0
    jet_degree: int = 6
    tol: float = 1e-12
    lmax: int = 1
    seeds: int = 3
    rng_seed: int = 0
    format: str = "json"
    out: str | None = None
    lambda_coeff: float | None = None
    samples_scale: float = 1.0

    def lattice(self) -> el.Lattice:
        try:
            return el.lattice_new(self.omega1, self.omega2)
        except el.LatticeError as exc:
            raise ConfigError(str(exc)) from exc


_PARSERS = {
    "omega1": parse_complex,
    "omega2": parse_complex,
    "coupling": float,
    "jet_degree": int,
    "tol": float,
    "lmax": int,
    "seeds": int,
    "rng_seed": int,
    "format": str,
    "out": str,
    "lambda_coeff": float,
    "samples_scale": float,
}


def _read_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, val = (part.strip() for part in line.split("=", 1))
                out[key.replace("-", "_")] = val
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    file_vals = _read_config_file(args.config) if getattr(args, "config", None) else {}
    cfg = RunConfig()
    for f in fields(RunConfig):
        parser = _PARSERS[f.name]
        value = getattr(args, f.name, None)
        if value is None:
            env = os.environ.get(ENV_PREFIX + f.name.upper())
            if env is not None:
                value = env
            elif f.name in file_vals:
                value = file_vals[f.name]
        if value is None:
            continue
        try:
            setattr(cfg, f.name, parser(value) if isinstance(value, str) else value)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"bad value for {f.name}: {exc}") from exc
    if cfg.format not in ("json", "csv"):
        raise ConfigError(f"format must be json or csv, got {cfg.format!r}")
    if cfg.jet_degree < 4:
        raise ConfigError("jet degree below 4 cannot compose the charges")
    return cfg


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _sig(value: float) -> float:
    """Round to the 12 significant digits the table contract promises."""
    return float(f"{value:.12g}")


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def cmd_verify(cfg: RunConfig, args: argparse.Namespace) -> int:
    cfg.lattice()  # reject a degenerate configured lattice before any suite
    if args.levels:
        return _verify_levels(cfg, args.levels)
    results = vf.run_verification(
        rng_seed=cfg.rng_seed,
        samples_scale=cfg.samples_scale,
        lambda_coeff=cfg.lambda_coeff,
        jet_degree=cfg.jet_degree,
        extra_coupling=cfg.coupling,
    )
    checks = [
        dict(name=r.name, max_residual=r.max_residual, tolerance=r.tolerance,
             passed=r.passed, samples=r.samples)
        for r in results
    ]
    ok = all(r.passed for r in results)
    report = dict(command="verify", version=__version__, backend=BACKEND,
                  rng_seed=cfg.rng_seed, passed=ok, checks=checks)
    _emit(json.dumps(report, indent=2) + "\n", cfg)
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: "
              f"max residual {r.max_residual:.3e} (tol {r.tolerance:.0e})", file=sys.stderr)
    if not ok:
        failing = ", ".join(r.name for r in results if not r.passed)
        print(f"verification FAILED: {failing}", file=sys.stderr)
        return 1
    print("verification passed", file=sys.stderr)
    return 0


def _verify_levels(cfg: RunConfig, path: str) -> int:
    """Re-check a previously written spectrum table (round-trip mode)."""
    lat = cfg.lattice()
    try:
        rows = _load_levels(path)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot parse level table {path}: {exc}") from exc
    checks = []
    ok = True
    for row in rows:
        l12 = complex(row["re_lambda12"], row["im_lambda12"])
        l31 = complex(row["re_lambda31"], row["im_lambda31"])
        f1, f2 = sp.bc_residual(l12, l31, int(row["l1"]), int(row["l2"]), lat)
        input_resid = float(max(abs(f1), abs(f2)))  # limited by table rounding
        try:
            # re-polish from the rounded table entry (a Newton step or two),
            # then judge the invariants at full precision
            lv = sp.solve_level(int(row["l1"]), int(row["l2"]), (l12, l31), lat,
                                l0=int(row["l0"]), tol=cfg.tol)
            resid = lv.residual
            bloch = lv.bloch_residual
            e_err = float(abs(lv.data.energy - complex(row["re_E"], row["im_E"])))
        except sp.SolveError:
            resid, bloch, e_err = float("inf"), float("inf"), float("inf")
        passed = bool(resid < 1e-10 and bloch < 1e-8 and e_err < 1e-6)
        ok = ok and passed
        checks.append(dict(l1=int(row["l1"]), l2=int(row["l2"]), l0=int(row["l0"]),
                           bc_residual=resid, bc_residual_input=input_resid,
                           bloch_residual=bloch, energy_mismatch=e_err, passed=passed))
    report = dict(command="verify-levels", source=path, passed=ok, levels=checks)
    _emit(json.dumps(report, indent=2) + "\n", cfg)
    print(f"level check: {sum(c['passed'] for c in checks)}/{len(checks)} passed",
          file=sys.stderr)
    return 0 if ok else 1


def _load_levels(path: str) -> list[dict]:
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json") or text.lstrip().startswith("{"):
        data = json.loads(text)
        return data["levels"]
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        rows.append({k: float(v) if k not in ("l0", "l1", "l2", "iterations") else int(v)
                     for k, v in row.items()})
    return rows


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------

CSV_COLUMNS = (
    "l0", "l1", "l2",
    "re_lambda12", "im_lambda12", "re_lambda31", "im_lambda31",
    "re_E", "im_E", "re_j1", "im_j1", "re_j2", "im_j2",
    "residual", "iterations",
)


def _level_row(lv: sp.Level) -> dict:
    return dict(
        l0=lv.l0, l1=lv.l1, l2=lv.l2,
        re_lambda12=_sig(lv.lambda12.real), im_lambda12=_sig(lv.lambda12.imag),
        re_lambda31=_sig(lv.lambda31.real), im_lambda31=_sig(lv.lambda31.imag),
        re_E=_sig(lv.data.energy.real), im_E=_sig(lv.data.energy.imag),
        re_j1=_sig(lv.data.j1.real), im_j1=_sig(lv.data.j1.imag),
        re_j2=_sig(lv.data.j2.real), im_j2=_sig(lv.data.j2.imag),
        residual=_sig(lv.residual), iterations=lv.newton_iters,
    )


def cmd_spectrum(cfg: RunConfig, args: argparse.Namespace) -> int:
    lat = cfg.lattice()
    if abs(lat.omega1.imag) > 1e-12 * abs(lat.omega1):
        raise ConfigError("spectrum needs a real omega1 (states live on the real circle)")
    levels = sp.enumerate_spectrum(cfg.lmax, cfg.seeds, lat, tol=cfg.tol)
    rows = [_level_row(lv) for lv in levels]
    if cfg.format == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
        _emit(buf.getvalue(), cfg)
    else:
        report = dict(
            command="spectrum", version=__version__,
            omega1=[lat.omega1.real, lat.omega1.imag],
            omega2=[lat.omega2.real, lat.omega2.imag],
            lmax=cfg.lmax, seeds=cfg.seeds,
            l0_convention="per-coordinate closure, l0 minimizing |K|",
            levels=rows,
        )
        _emit(json.dumps(report, indent=2) + "\n", cfg)
    print(f"{len(levels)} levels (lmax={cfg.lmax}, seeds={cfg.seeds})", file=sys.stderr)
    for lv in levels:
        print(f"  (l1,l2,l0)=({lv.l1},{lv.l2},{lv.l0})  E={lv.data.energy:.9g}  "
              f"bloch={lv.bloch_residual:.1e}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def cmd_eval(cfg: RunConfig, args: argparse.Namespace) -> int:
    lat = cfg.lattice()
    try:
        xs = tuple(parse_complex(t) for t in args.x.split(","))
        if len(xs) != 3:
            raise ConfigError("--x needs exactly three comma-separated coordinates")
        l12 = parse_complex(args.lambda12)
        l31 = parse_complex(args.lambda31)
        kappa = parse_complex(args.kappa)
        bnorm = parse_complex(args.b)
    except ConfigError:
        raise
    try:
        params = eg.complete_params(l12, l31, kappa, lat, b=bnorm)
    except eg.ParamError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        y, z = eg.eval_YZ(params, xs, lat)
        a, b, c = eg.components_ABC(params, xs, lat)
        state = eg.psi0(params, xs, lat)
    except el.PoleError as exc:
        raise ConfigError(f"evaluation point hits a pole: {exc}") from exc
    data = eg.eigen_data(params, lat)

    def c2l(v: complex) -> list[float]:
        return [_sig(v.real), _sig(v.imag)]

    record = dict(
        command="eval",
        x=[c2l(v) for v in xs],
        lambda12=c2l(l12), lambda31=c2l(l31), total_momentum=c2l(kappa),
        k=[c2l(k) for k in params.kvec],
        Y=c2l(y), Z=c2l(z), A=c2l(a), B=c2l(b), C=c2l(c),
        abc_residual=abs(a + b + c),
        psi0=[c2l(v) for v in state.values()],
        E=c2l(data.energy), j1=c2l(data.j1), j2=c2l(data.j2),
    )
    _emit(json.dumps(record, indent=2) + "\n", cfg)
    print(f"E={data.energy:.9g}  |A+B+C|={abs(a+b+c):.2e}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# special
# ---------------------------------------------------------------------------

_SPECIAL_FNS = {
    "wp": el.wp,
    "wp_prime": el.wp_prime,
    "zeta": el.zeta_w,
    "sigma": el.sigma_w,
}


def cmd_special(cfg: RunConfig, args: argparse.Namespace) -> int:
    lat = cfg.lattice()
    z = parse_complex(args.z)
    fn = _SPECIAL_FNS.get(args.fn)
    if fn is None:
        raise ConfigError(f"unknown function {args.fn!r}; pick from {sorted(_SPECIAL_FNS)}")
    try:
        value = fn(z, lat)
    except el.PoleError as exc:
        raise ConfigError(str(exc)) from exc
    record = dict(command="special", fn=args.fn,
                  z=[z.real, z.imag], value=[_sig(value.real), _sig(value.imag)])
    if args.oracle:
        oracle = LatticeSumOracle(lat.omega1, lat.omega2)
        oval = {"wp": oracle.wp, "wp_prime": oracle.wp_prime,
                "zeta": oracle.zeta, "sigma": oracle.sigma}[args.fn](z)
        record["oracle_value"] = [_sig(oval.real), _sig(oval.imag)]
        record["oracle_mismatch"] = abs(value - oval) / max(abs(oval), 1e-300)
    _emit(json.dumps(record, indent=2) + "\n", cfg)
    print(f"{args.fn}({z}) = {value}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value preset file")
    p.add_argument("--omega1", help="first half period (complex literal)")
    p.add_argument("--omega2", help="second half period (complex literal)")
    p.add_argument("--coupling", help="coupling constant a")
    p.add_argument("--jet-degree", dest="jet_degree", help="working jet degree (default 6)")
    p.add_argument("--tol", help="root-solver convergence tolerance")
    p.add_argument("--lmax", help="quantum number range |l| <= lmax")
    p.add_argument("--seeds", help="seed grid size per cell axis")
    p.add_argument("--rng-seed", dest="rng_seed", help="seed for all random draws")
    p.add_argument("--format", choices=("json", "csv"), help="table format")
    p.add_argument("--out", help="write the report/table to this path")
    # negative-control knob: replaces the spin-spin weight a^2/3
    p.add_argument("--lambda-coeff", dest="lambda_coeff", help=argparse.SUPPRESS)
    p.add_argument("--samples-scale", dest="samples_scale", help=argparse.SUPPRESS)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="spincm",
        description="Three-particle spin-1/2 elliptic many-body eigenproblem toolkit",
    )
    ap.add_argument("--version", action="version", version=f"spincm {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("verify", help="run the verification suites")
    _add_common(p)
    p.add_argument("--levels", help="re-check a spectrum table written by `spectrum`")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("spectrum", help="enumerate the quantized levels")
    _add_common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("eval", help="evaluate the two-parameter state at a point")
    _add_common(p)
    p.add_argument("--x", required=True, help="three comma-separated complex coordinates")
    p.add_argument("--lambda12", required=True, help="first spectral parameter")
    p.add_argument("--lambda31", required=True, help="second spectral parameter")
    p.add_argument("--kappa", default="0", help="total momentum (default 0)")
    p.add_argument("-b", default="1", help="normalization constant")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("special", help="evaluate one kernel function")
    _add_common(p)
    p.add_argument("--fn", required=True, help="wp | wp_prime | zeta | sigma")
    p.add_argument("--z", required=True, help="argument (complex literal)")
    p.add_argument("--oracle", action="store_true",
                   help="also print the lattice-sum oracle value")
    p.set_defaults(func=cmd_special)

    # Let values like "-0.17+0.23i" pass as arguments instead of flags.
    matcher = re.compile(r"^-[\d.]")
    for parser in (ap, *sub.choices.values()):
        parser._negative_number_matcher = matcher
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
