"""Command-line front end.

Subcommands: fit, asymvar, curves, simulate, validate, pipeline, qoi.
Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
Failures emit a machine-readable JSON error object on stderr.  Every run
writes a JSON metadata sidecar echoing the fully resolved configuration,
which is sufficient to reproduce the outputs bit for bit.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, asymptotics, estimators, experiments, qoi
from .dataset import load_dataset, save_dataset
from .errors import DataError, MFMCError, ParameterDomainError
from .models.joint import model_from_id
from .models.marginals import GumbelLocation, family_from_id

USAGE_EXIT = 2
DATA_EXIT = 3
NUMERIC_EXIT = 4

MODEL_IDS = ("bivariate-gaussian", "bivariate-gumbel-logistic",
             "bernoulli-copula", "bernoulli-mixture")


class UsageError(Exception):
    pass


def _parse_params(pairs):
    params = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise UsageError(f"--param expects name=value, got {pair!r}")
        name, _, raw = pair.partition("=")
        name = name.strip()
        raw = raw.strip()
        if name == "copula_id":
            params[name] = raw
        else:
            try:
                params[name] = float(raw)
            except ValueError:
                raise UsageError(f"--param {name} expects a number, got {raw!r}")
    return params


def _build_model(model_id, params):
    if model_id is None:
        raise UsageError("this command needs --model")
    if model_id not in MODEL_IDS:
        raise UsageError(f"unknown model {model_id!r}; choose from {MODEL_IDS}")
    try:
        return model_from_id(model_id, **params)
    except (ParameterDomainError, TypeError) as exc:
        raise UsageError(f"invalid model parameters: {exc}") from exc


def _family_view(args, model=None):
    fam_id = getattr(args, "family", None)
    if fam_id is None:
        return None
    try:
        if fam_id == "gumbel-location":
            sigma = getattr(args, "sigma", None)
            if sigma is None and model is not None:
                sigma = model.sigma1
            if sigma is None:
                raise UsageError("gumbel-location needs --sigma")
            mu = model.mu1 if model is not None else 0.0
            return GumbelLocation(mu, float(sigma))
        defaults = {"gaussian": (0.0, 1.0), "gumbel": (0.0, 1.0),
                    "bernoulli": (0.5,)}
        if fam_id not in defaults:
            raise UsageError(f"unknown family {fam_id!r}")
        return family_from_id(fam_id, *defaults[fam_id])
    except ParameterDomainError as exc:
        raise UsageError(str(exc)) from exc


def _sidecar(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _estimate_payload(est, confidence, config_echo):
    from scipy import special

    payload = {
        "method": est.method,
        "theta1": [float(v) for v in est.theta1],
        "theta2": None if est.theta2 is None else [float(v) for v in est.theta2],
        "theta12": est.theta12,
        "n": est.n,
        "m": est.m,
        "warnings": list(est.warnings),
        "version": __version__,
        "config": config_echo,
    }
    if est.coefficients is not None:
        payload["coefficients"] = {
            k: (np.asarray(v).tolist() if np.ndim(v) else float(v))
            for k, v in est.coefficients.items()}
    if est.cov is not None:
        ses = est.standard_errors()
        z = float(special.ndtri(0.5 + confidence / 2.0))
        payload["cov"] = [[float(v) for v in row] for row in np.atleast_2d(est.cov)]
        payload["se"] = [float(s) for s in ses]
        payload["interval"] = {
            "confidence": confidence,
            "low": [float(t - z * s) for t, s in zip(est.theta1, ses)],
            "high": [float(t + z * s) for t, s in zip(est.theta1, ses)],
        }
    return payload


# ---------------------------------------------------------------------------
# subcommand implementations

def _cmd_fit(args):
    dataset = load_dataset(args.input)
    model = None
    if args.model is not None:
        model = _build_model(args.model, _parse_params(args.param))
    family = args.family
    spec = None
    if family == "gumbel-location":
        if args.sigma is None:
            raise UsageError("gumbel-location needs --sigma")
        fam = GumbelLocation(0.0, args.sigma)
        family = fam
        spec = fam.moment_spec()
    est = estimators.fit(dataset, args.method, family=family, spec=spec,
                         model=model, mode=args.mode)
    os.makedirs(args.out, exist_ok=True)
    config_echo = {"command": "fit", "method": args.method, "input": args.input,
                   "model": args.model, "params": _parse_params(args.param),
                   "family": args.family, "mode": args.mode,
                   "confidence": args.confidence}
    path = os.path.join(args.out, "estimate.json")
    _sidecar(path, _estimate_payload(est, args.confidence, config_echo))
    print(path)
    return 0


def _cmd_asymvar(args):
    model = _build_model(args.model, _parse_params(args.param))
    family = _family_view(args, model)
    sigma = asymptotics.asym_cov(args.method, model, family=family,
                                 dependence=args.dependence)
    names = asymptotics.component_names(model, family)
    os.makedirs(args.out, exist_ok=True)
    rows = []
    sigma = np.atleast_2d(sigma)
    for i, comp in enumerate(names):
        rows.append({"method": args.method, "component": comp,
                     "variance": float(sigma[i, i])})
    config_echo = {"command": "asymvar", "method": args.method,
                   "model": args.model, "params": _parse_params(args.param),
                   "family": args.family, "dependence": args.dependence}
    path = os.path.join(args.out, "asymvar.json")
    _sidecar(path, {"rows": rows,
                    "covariance": [[float(v) for v in row] for row in sigma],
                    "version": __version__, "config": config_echo})
    print(path)
    return 0


def _parse_grid(pairs, defaults):
    grid = dict(defaults)
    for pair in pairs or []:
        if "=" not in pair:
            raise UsageError(f"--grid expects name=v1,v2,..., got {pair!r}")
        name, _, raw = pair.partition("=")
        try:
            grid[name.strip()] = [float(v) for v in raw.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"--grid {name} expects numbers, got {raw!r}")
    return grid


def _cmd_curves(args):
    config = experiments.default_config(args.figure, args.seed)
    if args.grid:
        config = experiments.default_config(
            args.figure, args.seed,
            grid=_parse_grid(args.grid, config.grid))
    report = experiments.run_figure(config)
    paths = report.write(args.out)
    print("\n".join(paths))
    return 0


def _cmd_simulate(args):
    model = _build_model(args.model, _parse_params(args.param))
    rng = np.random.default_rng(args.seed)
    x1, x2 = model.sample(args.n, rng)
    extra = model.marginal2.sample(args.m, rng) if args.m else None
    from .dataset import MFDataset

    ds = MFDataset(x1, x2, extra)
    out_dir = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(out_dir, exist_ok=True)
    save_dataset(ds, args.out)
    _sidecar(args.out + ".meta.json",
             {"config": {"command": "simulate", "model": args.model,
                         "params": _parse_params(args.param), "n": args.n,
                         "m": args.m, "seed": args.seed},
              "version": __version__})
    print(args.out)
    return 0


def _cmd_validate(args):
    methods = tuple(args.methods.split(",")) if args.methods else experiments.VALIDATION_METHODS
    config = experiments.default_config(
        "mc-validate", args.seed, model=args.model,
        params=_parse_params(args.param), n=args.n, m=args.m,
        replications=args.replications, methods=methods,
        options={"m_infinity": bool(args.m_infinity)})
    report = experiments.run_mc_validation(config, workers=args.workers)
    paths = report.write(args.out)
    print("\n".join(paths))
    return 0


def _cmd_pipeline(args):
    overrides = {}
    if args.param:
        params = experiments.default_config("pipeline", args.seed).params
        params.update(_parse_params(args.param))
        overrides["params"] = params
    if args.n is not None:
        overrides["n"] = args.n
    if args.m is not None:
        overrides["m"] = args.m
    overrides["confidence"] = args.confidence
    overrides["options"] = {"a1": args.a1, "p1": args.p1}
    config = experiments.default_config("pipeline", args.seed, **overrides)
    dataset = load_dataset(args.input) if args.input else None
    report = experiments.run_pipeline(config, dataset=dataset)
    paths = report.write(args.out)
    print("\n".join(paths))
    return 0


def _cmd_qoi(args):
    with open(args.estimate, encoding="utf-8") as fh:
        payload = json.load(fh)
    if "cov" not in payload:
        raise DataError("estimate file carries no covariance")
    est = estimators.Estimate(
        payload["method"], np.array(payload["theta1"], dtype=float),
        np.array(payload["cov"], dtype=float), payload["n"], payload["m"],
        coefficients=payload.get("coefficients"))
    if args.kind == "log10-exceedance":
        spec = qoi.log10_exceedance(args.a1)
    elif args.kind == "quantile":
        spec = qoi.quantile(args.p1)
    else:
        raise UsageError(f"unknown qoi kind {args.kind!r}")
    result = qoi.qoi_estimate(spec, est, confidence=args.confidence, side=args.side)
    os.makedirs(args.out, exist_ok=True)
    config_echo = {"command": "qoi", "estimate": args.estimate, "kind": args.kind,
                   "a1": args.a1, "p1": args.p1, "confidence": args.confidence,
                   "side": args.side}
    path = os.path.join(args.out, "qoi.json")
    _sidecar(path, {"kind": args.kind, "method": est.method,
                    "point": result.point, "variance": result.variance,
                    "interval": list(result.interval),
                    "confidence": result.confidence, "side": result.side,
                    "version": __version__, "config": config_echo})
    print(path)
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="mfmc",
        description="Parametric multi-fidelity Monte Carlo estimation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="run one estimator on a dataset")
    p.add_argument("--method", required=True, choices=sorted(estimators.KNOWN_METHODS))
    p.add_argument("--input", required=True)
    p.add_argument("--family", choices=["gaussian", "gumbel", "gumbel-location",
                                        "bernoulli"])
    p.add_argument("--sigma", type=float, help="fixed scale for gumbel-location")
    p.add_argument("--model", choices=MODEL_IDS)
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.add_argument("--mode", help="plugin|true for combined methods, free|known for joint-ml")
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("asymvar", help="model-true asymptotic variance of a method")
    p.add_argument("--method", required=True, choices=sorted(asymptotics.METHODS))
    p.add_argument("--model", required=True, choices=MODEL_IDS)
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.add_argument("--family", choices=["gaussian", "gumbel", "gumbel-location",
                                        "bernoulli"])
    p.add_argument("--sigma", type=float)
    p.add_argument("--dependence", choices=["known", "estimated"], default="estimated")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_asymvar)

    p = sub.add_parser("curves", help="variance-curve tables for a figure id")
    p.add_argument("--figure", required=True, choices=list(experiments.FIGURE_IDS))
    p.add_argument("--grid", action="append", metavar="NAME=V1,V2,...",
                   help="override a sweep grid of the figure")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_curves)

    p = sub.add_parser("simulate", help="sample a joint model to CSV")
    p.add_argument("--model", required=True, choices=MODEL_IDS)
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("validate", help="Monte Carlo validation of asymptotics")
    p.add_argument("--model", required=True, choices=MODEL_IDS)
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--replications", type=int, required=True)
    p.add_argument("--methods", help="comma-separated method list")
    p.add_argument("--m-infinity", action="store_true", dest="m_infinity")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=None,
                   help="overrides the MFMC_THREADS cap")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("pipeline", help="end-to-end application flow")
    p.add_argument("--input", help="CSV dataset; synthetic data when omitted")
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--a1", type=float, default=6.5)
    p.add_argument("--p1", type=float, default=0.99)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("qoi", help="quantity of interest from an estimate file")
    p.add_argument("--estimate", required=True)
    p.add_argument("--kind", required=True, choices=["log10-exceedance", "quantile"])
    p.add_argument("--a1", type=float, default=6.5)
    p.add_argument("--p1", type=float, default=0.99)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--side", choices=["two-sided", "lower", "upper"],
                   default="two-sided")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_qoi)
    return parser


def _emit_error(code, exc):
    obj = {"error": {"code": code, "type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(obj, sort_keys=True), file=sys.stderr)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        _emit_error(USAGE_EXIT, exc)
        return USAGE_EXIT
    except DataError as exc:
        _emit_error(DATA_EXIT, exc)
        return DATA_EXIT
    except MFMCError as exc:
        _emit_error(NUMERIC_EXIT, exc)
        return NUMERIC_EXIT


if __name__ == "__main__":
    sys.exit(main())
