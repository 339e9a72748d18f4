"""Command-line entry point: ``tolltrees <command> [options]``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings

import numpy as np

from . import constants as C
from . import montecarlo as MC
from . import oracle as O
from .tolls import TOLL_REGISTRY, parse_toll, relabel_invariance_audit
from .trees import (
    EnumerationLimitError,
    ModelParams,
    ParameterError,
    count_model,
    enumerate_model,
    grow,
)

SCHEMA_VERSION = 1
WORKERS_ENV = "TOLLTREES_WORKERS"

# option name -> fallback when neither the flag nor the config file sets it
DEFAULTS = {
    "model": "dary:2", "toll": "leaf", "n": None, "samples": 10_000, "seed": None,
    "workers": None, "K": None, "N": 2000, "format": "text", "output": None,
    "count": 1, "variant": "plus-scaled", "sizes": "10,100,1000", "alpha": None, "d": None,
    "size_cutoff": 5, "values_csv": None, "keep_values": 0, "skew_tol": 0.05,
    "kurtosis_tol": 0.1, "ks_tol": 0.01, "variance_tol": None, "gate": False,
    "timings": False,
}


class UsageError(Exception):
    pass


def _registry_text() -> str:
    lines = ["models:",
             "  dary:<d>          d-ary increasing trees, integer d >= 2",
             "  gport:<alpha>     generalised plane-oriented recursive trees, alpha > 0 (e.g. 1/2)",
             "  port              gport with alpha = 1",
             "  recursive         uniform recursive trees",
             "tolls (name[:key=value,...]):"]
    for name, (_, schema) in TOLL_REGISTRY.items():
        params = ", ".join(f"{k}: {v}" for k, v in schema.items()) or "no parameters"
        lines.append(f"  {name:<22}{params}")
    return "\n".join(lines)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="model, e.g. dary:2, gport:1/2, port, recursive")
    common.add_argument("--toll", help="toll, e.g. leaf or fringe-size:k=1")
    common.add_argument("--n", type=int, help="tree size")
    common.add_argument("--samples", type=int, help="number of samples")
    common.add_argument("--seed", type=int, help="master seed (required for random commands)")
    common.add_argument("--workers", type=int, help=f"worker threads (default ${WORKERS_ENV} or 1)")
    common.add_argument("-K", dest="K", type=int, help="tree-size truncation for constants")
    common.add_argument("-N", dest="N", type=int, help="length of the size-grouped series")
    common.add_argument("--format", choices=["json", "csv", "text"])
    common.add_argument("--output", help="write the primary output here instead of stdout")
    common.add_argument("--config", help="JSON file with option values; flags override it")
    common.add_argument("--timings", action="store_true", default=None,
                        help="include wall-clock timings (output no longer reproducible)")

    p = argparse.ArgumentParser(
        prog="tolltrees", description="Random increasing trees and additive functionals.",
        epilog=_registry_text(), formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    fmt = argparse.RawDescriptionHelpFormatter

    g = sub.add_parser("generate", parents=[common], help="random trees in the text format",
                       epilog=_registry_text(), formatter_class=fmt)
    g.add_argument("--count", type=int)
    sub.add_parser("enumerate", parents=[common], help="all trees of size n",
                   epilog=_registry_text(), formatter_class=fmt)
    sub.add_parser("count", parents=[common], help="number of trees of size n")
    c = sub.add_parser("constants", parents=[common], help="limit constants mu, sigma2",
                       epilog=_registry_text(), formatter_class=fmt)
    c.add_argument("--variant", choices=list(C.GPORT_VARIANTS))
    sub.add_parser("mean-exact", parents=[common], help="exact E F(T_n) from the mean identity",
                   epilog=_registry_text(), formatter_class=fmt)
    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo moments and normality",
                       epilog=_registry_text(), formatter_class=fmt)
    s.add_argument("--gate", action="store_true", default=None,
                   help="exit 1 unless skewness, kurtosis and KS pass their tolerances")
    s.add_argument("--skew-tol", type=float)
    s.add_argument("--kurtosis-tol", type=float)
    s.add_argument("--ks-tol", type=float)
    s.add_argument("--variance-tol", type=float, help="relative tolerance for variance vs sigma2*n")
    s.add_argument("--values-csv", help="also write per-sample values here (CSV)")
    s.add_argument("--keep-values", type=int, help="cap on values written by --values-csv")
    v = sub.add_parser("verify", parents=[common], help="oracle checks",
                       epilog=_registry_text(), formatter_class=fmt)
    v.add_argument("check", choices=["uniformity", "probability", "mean", "relabel", "count"])
    v.add_argument("--alpha", help="alpha for the probability check (e.g. 1/2)")
    v.add_argument("--d", type=int, help="arity for uniformity/count/relabel checks")
    v.add_argument("--size-cutoff", type=int)
    dcy = sub.add_parser("decay", parents=[common], help="Monte Carlo E|f(T_k)| on a size grid",
                         epilog=_registry_text(), formatter_class=fmt)
    dcy.add_argument("--sizes", help="comma-separated sizes")
    return p


def _resolve(args) -> dict:
    cfg = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
    opts = {}
    for key, fallback in DEFAULTS.items():
        val = getattr(args, key, None)
        if val is None:
            val = cfg.get(key, fallback)
        opts[key] = val
    if opts["workers"] is None:
        opts["workers"] = int(os.environ.get(WORKERS_ENV, "1"))
    opts["command"] = args.command
    opts["check"] = getattr(args, "check", None)
    return opts


def _need(opts, *keys):
    for k in keys:
        if opts.get(k) is None:
            raise UsageError(f"--{k.replace('_', '-')} is required for '{opts['command']}'")


def _toll(opts, model=None):
    try:
        return parse_toll(opts["toll"])
    except ParameterError as exc:
        raise UsageError(f"{exc}\n{_registry_text()}") from exc


def _model(opts) -> ModelParams:
    try:
        return ModelParams.parse(opts["model"])
    except (ParameterError, ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"{exc}\n{_registry_text()}") from exc


def _dump(obj) -> str:
    return MC.report_json(obj) + "\n"


def _text(payload: dict) -> str:
    lines = []
    for k, v in payload.items():
        if isinstance(v, float):
            v = repr(v)
        elif isinstance(v, (dict, list)):
            v = json.dumps(v, default=str, sort_keys=True)
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"


def _emit(opts, payload, text=None, csv_text=None) -> str:
    fmt = opts["format"]
    if fmt == "json":
        if isinstance(payload, dict):
            payload = {"schema_version": SCHEMA_VERSION, **payload}
        return _dump(payload)
    if fmt == "csv":
        if csv_text is None:
            raise UsageError(f"'{opts['command']}' has no CSV output")
        return csv_text
    return text if text is not None else _text(payload)


# ---------------------------------------------------------------------------
# commands


def cmd_generate(opts):
    _need(opts, "n", "seed")
    model = _model(opts)
    seq = np.random.SeedSequence(opts["seed"])
    trees = []
    for i in range(opts["count"]):
        rng = np.random.default_rng([opts["seed"], i])
        trees.append(grow(model, opts["n"], rng).to_text())
    payload = {"model": str(model), "n": opts["n"], "seed": opts["seed"],
               "seed_manifest": [{"tree": i, "seed": [seq.entropy, i]} for i in range(len(trees))],
               "trees": trees}
    return 0, _emit(opts, payload, text="\n".join(trees) + "\n")


def cmd_enumerate(opts):
    _need(opts, "n")
    model = _model(opts)
    trees = [t.to_text() for t in enumerate_model(model, opts["n"])]
    return 0, _emit(opts, {"model": str(model), "n": opts["n"], "trees": trees},
                    text="\n".join(trees) + "\n")


def cmd_count(opts):
    _need(opts, "n")
    model = _model(opts)
    value = count_model(model, opts["n"])
    return 0, _emit(opts, {"model": str(model), "n": opts["n"], "count": value},
                    text=f"{value}\n", csv_text=f"model,n,count\n{model},{opts['n']},{value}\n")


def _constants_for(model, toll, opts, quiet=False):
    with warnings.catch_warnings():
        if quiet:
            warnings.simplefilter("ignore")
        if model.variant == "dary":
            return C.sigma2_enumeration(model, toll, opts["K"])
        if model.variant == "gport":
            return C.gport_constants(model.alpha, toll, opts["K"] or 6, variant=opts["variant"])
    raise UsageError("limit constants are available for dary and gport models only")


def cmd_constants(opts):
    model = _model(opts)
    toll = _toll(opts)
    res = _constants_for(model, toll, opts)
    payload = {"model": str(model), "toll": toll.label(), "method": res.method, "K": res.K,
               "mu": res.mu, "sigma2": res.sigma2, "mu_sequence": res.mu_sequence,
               "sigma2_sequence": res.sigma2_sequence, "tail_bound": res.tail_bound}
    if model.variant == "gport":
        payload["sigma2_variants"] = res.extras["sigma2_variants"]
    if toll.size_only:
        series = C.mu_size_series(model, C.size_only_profile(toll, opts["N"]), opts["N"],
                                  bound=toll.sup(model.d))
        payload["size_series"] = {"N": opts["N"], "mu": series.mu, "tail_bound": series.tail_bound}
    if model.variant == "dary" and toll.name in ("fringe-size", "leaf", "fringe-occurrence"):
        if toll.name == "fringe-occurrence":
            closed = C.fringe_constants(model.d, "occurrence", tree=toll.params["tree"])
        else:
            closed = C.fringe_constants(model.d, "size", toll.params.get("k", 1))
        payload["closed_form"] = {"mu": closed.mu, "sigma2": closed.sigma2,
                                  "mu_exact": str(closed.extras["mu_exact"]),
                                  "sigma2_exact": str(closed.extras["sigma2_exact"])}
    if opts["timings"]:
        payload["timings"] = res.timings
    csv_text = "k,mu,sigma2\n" + "".join(
        f"{k},{m!r},{s!r}\n" for k, (m, s) in enumerate(zip(res.mu_sequence, res.sigma2_sequence), 1))
    return 0, _emit(opts, payload, csv_text=csv_text)


def cmd_mean_exact(opts):
    _need(opts, "n")
    model = _model(opts)
    toll = _toll(opts)
    value = C.exact_mean(model, toll, opts["n"])
    return 0, _emit(opts, {"model": str(model), "toll": toll.label(), "n": opts["n"],
                           "mean": value})


def cmd_simulate(opts):
    _need(opts, "n", "seed")
    model = _model(opts)
    toll = _toll(opts)
    keep = opts["keep_values"] or (10_000 if opts["values_csv"] else 0)
    stats = MC.simulate(model, toll, opts["n"], opts["samples"], opts["seed"],
                        workers=opts["workers"], keep_values=keep)
    constants = None
    if model.variant in ("dary", "gport") and toll.sup(model.d) is not None:
        constants = _constants_for(model, toll, opts, quiet=True)
    report = MC.normality_report(stats, constants)
    gates = report.gates(opts["skew_tol"], opts["kurtosis_tol"], opts["ks_tol"],
                         opts["variance_tol"])
    payload = {"model": str(model), "toll": toll.label(), "n": opts["n"],
               "samples": opts["samples"], "seed": opts["seed"],
               "stats": {k: v for k, v in stats.to_dict().items() if k != "extras"},
               "normality": report.to_dict(), "gates": gates,
               "constants": None if constants is None else
               {"mu": constants.mu, "sigma2": constants.sigma2, "K": constants.K}}
    payload["stats"]["extras"] = {k: v for k, v in stats.extras.items() if k != "workers"}
    if opts["values_csv"]:
        with open(opts["values_csv"], "w", encoding="utf-8") as fh:
            fh.write(stats.values_csv())
    failed = opts["gate"] or opts["variance_tol"] is not None
    code = 1 if failed and not all(gates.values()) else 0
    text = _text({"mean": stats.mean, "variance": stats.variance,
                  "variance_per_n": stats.variance / opts["n"], "skewness": report.skewness,
                  "excess_kurtosis": report.excess_kurtosis, "ks": report.ks_statistic,
                  "gates": gates})
    return code, _emit(opts, payload, text=text, csv_text=stats.values_csv())


def cmd_verify(opts):
    check = opts["check"]
    if check == "uniformity":
        _need(opts, "n", "seed")
        d = opts["d"] or _model(opts).d
        rep = O.verify_uniformity(d, opts["n"], opts["samples"], opts["seed"],
                                  workers=opts["workers"])
    elif check == "probability":
        _need(opts, "n")
        alpha = opts["alpha"] or (str(_model(opts).alpha) if _model(opts).variant == "gport" else None)
        if alpha is None:
            raise UsageError("probability check needs --alpha or a gport model")
        rep = O.verify_model_probability(alpha, opts["n"])
    elif check == "mean":
        _need(opts, "n")
        rep = O.verify_mean_formula(_model(opts), _toll(opts), opts["n"])
    elif check == "relabel":
        model = _model(opts)
        rep = relabel_invariance_audit(_toll(opts), opts["size_cutoff"], model=model)
    else:
        _need(opts, "n")
        d = opts["d"] or _model(opts).d
        rep = O.count_check(d, opts["n"])
    text = ("pass" if rep["passed"] else "FAIL") + f" {check}\n" + _text(rep)
    return (0 if rep["passed"] else 1), _emit(opts, rep, text=text)


def cmd_decay(opts):
    _need(opts, "seed")
    sizes = [int(s) for s in str(opts["sizes"]).split(",") if s.strip()]
    rep = MC.estimate_toll_decay(_model(opts), _toll(opts), sizes, opts["samples"],
                                 opts["seed"], opts["workers"])
    csv_text = "size,mean_abs_toll,stderr\n" + "".join(
        f"{r['size']},{r['mean_abs_toll']!r},{r['stderr']!r}\n" for r in rep["rows"])
    return 0, _emit(opts, rep, csv_text=csv_text)


COMMANDS = {
    "generate": cmd_generate, "enumerate": cmd_enumerate, "count": cmd_count,
    "constants": cmd_constants, "mean-exact": cmd_mean_exact, "simulate": cmd_simulate,
    "verify": cmd_verify, "decay": cmd_decay,
}


def run(argv=None) -> int:
    """Run one command; returns 0 on success, 1 on a failed check, 2 on usage errors."""
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        opts = _resolve(args)
        code, out = COMMANDS[opts["command"]](opts)
    except (UsageError, ParameterError, EnumerationLimitError, OSError, json.JSONDecodeError) as exc:
        print(f"tolltrees: error: {exc}", file=sys.stderr)
        return 2
    if opts["output"]:
        with open(opts["output"], "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
