"""Command-line front end.

Every command reads an optional JSON config (``--config``) whose keys are
checked against a fixed schema, then applies flag overrides. Results go to
``--out`` together with ``manifest.json``. Exit status: 0 pass, 2 failed
statistical acceptance, 1 error.
"""

import argparse
import json
import os
import re
import sys
import time

import numpy as np

from . import __version__

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class ConfigError(ValueError):
    pass


# --- value parsing ------------------------------------------------------------------

def to_complex(v):
    if isinstance(v, dict):
        extra = set(v) - {"re", "im"}
        if extra:
            raise ConfigError(f"complex value has unknown keys {sorted(extra)}")
        return complex(v.get("re", 0.0), v.get("im", 0.0))
    if isinstance(v, str):
        return complex(v.replace(" ", "").replace("i", "j"))
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    raise ConfigError(f"cannot read {v!r} as a complex number")


def to_matrix(v):
    """Nested list of numbers or complex strings, or {"re": [[..]], "im": [[..]]}.

    A flat list is read as a diagonal.
    """
    if v is None:
        return None
    if isinstance(v, dict):
        extra = set(v) - {"re", "im"}
        if extra:
            raise ConfigError(f"matrix has unknown keys {sorted(extra)}")
        re_ = np.asarray(v.get("re", 0.0), dtype=float)
        im_ = np.asarray(v.get("im", np.zeros_like(re_)), dtype=float)
        return re_ + 1j * im_
    if not isinstance(v, list):
        raise ConfigError(f"expected a matrix, got {v!r}")
    if all(not isinstance(x, list) for x in v):
        return np.diag([to_complex(x) for x in v]).astype(np.complex128)
    if not all(isinstance(x, list) for x in v):
        raise ConfigError("matrix mixes rows and scalars")
    rows = [[to_complex(x) for x in row] for row in v]
    if len({len(r) for r in rows}) > 1:
        raise ConfigError("matrix rows have unequal lengths")
    return np.array(rows, dtype=np.complex128)


def to_complex_list(v):
    if v is None:
        return []
    if not isinstance(v, list):
        v = [v]
    return [to_complex(x) for x in v]


def to_int_list(v):
    if isinstance(v, str):
        return [int(x) for x in v.split(",") if x]
    return [int(x) for x in v]


def parse_grid(spec):
    """``start:stop:step`` inclusive of ``stop`` up to round-off, or a single value."""
    if isinstance(spec, (int, float)):
        return np.array([float(spec)])
    parts = [float(x) for x in str(spec).split(":")]
    if len(parts) == 1:
        return np.array(parts)
    if len(parts) != 3 or parts[2] <= 0:
        raise ConfigError(f"grid must be start:stop:step with step > 0, got {spec!r}")
    a, b, h = parts
    k = int(np.floor((b - a) / h + 1e-9))
    return a + h * np.arange(k + 1)


def load_jordan(v, base=None):
    from .model import JordanSpec

    if v is None:
        return None
    if isinstance(v, str):
        path = v if base is None or os.path.isabs(v) else os.path.join(base, v)
        with open(path) as fh:
            v = json.load(fh)
    return JordanSpec.from_dict(v)


# --- schema -------------------------------------------------------------------------

# name -> (converter, default); REQUIRED marks a mandatory key
REQUIRED = object()


def _num(x):
    if isinstance(x, bool) or not isinstance(x, (int, float, str)):
        raise ConfigError(f"expected a number, got {x!r}")
    return float(x)


def _int(x):
    if isinstance(x, bool):
        raise ConfigError(f"expected an integer, got {x!r}")
    if isinstance(x, float) and not x.is_integer():
        raise ConfigError(f"expected an integer, got {x!r}")
    return int(x)


def _str(x):
    return str(x)


def _raw(x):
    return x


SCHEMAS = {
    "sample": {
        "beta": (_int, 2), "n": (_int, REQUIRED), "replicas": (_int, 10), "tau": (_num, None),
        "jordan": (_raw, None), "method": (_str, "dense"),
        "center": (to_complex, None), "radius": (_num, None),
    },
    "edge-stats": {
        "beta": (_int, 2), "n": (_int, REQUIRED), "replicas": (_int, 200),
        "z0_re": (_num, 1.0), "z0_im": (_num, 0.0), "jordan": (_raw, None),
        "t": (_int, None), "window": (_num, 5.0), "bins": (_num, 0.25), "method": (_str, "auto"),
    },
    "kernel-eval": {
        "t": (_int, REQUIRED), "grid": (_raw, "-5:3:0.1"), "im_grid": (_raw, 0.0),
        "beta": (_int, 2), "z0_re": (_num, 1.0), "z0_im": (_num, 0.0),
    },
    "duality-check": {
        "beta": (_int, REQUIRED), "case": (_raw, REQUIRED), "budget": (_int, None),
        "threshold": (_num, 3.0), "retry": (bool, True),
    },
    "charpoly-check": {
        "beta": (_int, REQUIRED), "n": (_int, REQUIRED), "z": (to_complex_list, REQUIRED),
        "w": (to_complex_list, []), "x0": (to_matrix, None), "sigma": (to_matrix, None),
        "gamma": (to_matrix, None), "tau": (_num, None), "budget": (_int, 100_000),
        "threshold": (_num, 3.0),
    },
    "integral-check": {
        "n": (_int, 1), "t": (_int, 1), "points": (to_complex_list, REQUIRED),
        "z0_re": (_num, 1.0), "z0_im": (_num, 0.0), "budget": (_int, 1_000_000), "width": (_num, None),
    },
    "prop13-check": {
        "a": (to_complex, 0.0), "z": (to_complex, REQUIRED), "n": (_int, 8),
        "budget": (_int, 100_000), "disk_radius": (_num, 0.15),
    },
    "outlier-scaling": {
        "theta": (to_complex, 1.5), "p": (_int, 1), "ns": (to_int_list, [128, 256, 512, 1024, 2048, 4096]),
        "replicas": (_int, 300), "truncation": (_int, 200),
    },
    "critical-scaling": {
        "z0_re": (_num, 1.0), "z0_im": (_num, 0.0), "p": (_int, 1), "theta_hat": (to_complex, 1.0),
        "ns": (to_int_list, [256, 512, 1024, 2048]), "replicas": (_int, 200), "window": (_num, 5.0),
        "method": (_str, "auto"),
    },
}
STOCHASTIC = set(SCHEMAS) - {"kernel-eval"}
TOP_KEYS = {"command", "seed", "output_dir", "format", "threads", "parameters"}
CASE_KEYS = {"n", "k", "a", "x0", "y0", "sigma", "gamma", "tau", "budget"}


def _key_line(text, key):
    if not text:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _where(text, key):
    line = _key_line(text, key)
    return f"line {line}: " if line else ""


def check_config(raw, text=""):
    """Return ``(resolved, diagnostics)``; ``resolved`` is None when invalid."""
    diags = []
    if not isinstance(raw, dict) or not raw:
        return None, ["missing 'command'"]
    for k in raw:
        if k not in TOP_KEYS:
            diags.append(f"{_where(text, k)}unknown top-level key '{k}'")
    cmd = raw.get("command")
    if cmd is None:
        diags.append("missing 'command'")
        return None, diags
    if cmd not in SCHEMAS:
        diags.append(f"{_where(text, 'command')}unknown command '{cmd}'")
        return None, diags
    fmt = raw.get("format", "json")
    if fmt not in ("csv", "json"):
        diags.append(f"{_where(text, 'format')}format must be csv or json")
    params = raw.get("parameters", {})
    if not isinstance(params, dict):
        diags.append("'parameters' must be a mapping")
        params = {}
    schema = SCHEMAS[cmd]
    resolved = {}
    for k, v in params.items():
        if k not in schema:
            diags.append(f"{_where(text, k)}unknown parameter '{k}' for {cmd}")
            continue
        conv = schema[k][0]
        try:
            resolved[k] = conv(v) if v is not None else None
        except (ConfigError, ValueError, TypeError) as exc:
            diags.append(f"{_where(text, k)}parameter '{k}': {exc}")
    for k, (_, default) in schema.items():
        if k not in resolved and k not in params:
            if default is REQUIRED:
                diags.append(f"missing required parameter '{k}' for {cmd}")
            else:
                resolved[k] = default
    if isinstance(params.get("jordan"), (dict, list)):
        from .model import SpecError

        try:
            load_jordan(params["jordan"])
        except SpecError as exc:
            diags.append(f"{_where(text, 'jordan')}jordan: {exc}")
        except (KeyError, TypeError, ValueError) as exc:
            diags.append(f"{_where(text, 'jordan')}jordan: malformed entry ({exc})")
    seed = raw.get("seed")
    if cmd in STOCHASTIC and seed is None:
        diags.append(f"'seed' is required for {cmd}")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or seed < 0):
        diags.append(f"{_where(text, 'seed')}seed must be a nonnegative integer")
    if diags:
        return None, diags
    out = {
        "command": cmd, "seed": seed, "output_dir": raw.get("output_dir", "."),
        "format": fmt, "threads": raw.get("threads"), "parameters": resolved,
    }
    return out, []


def validate_config(path):
    """Diagnostics for a config file without running it."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        return [f"cannot read {path}: {exc}"], None
    if not text.strip():
        return ["missing 'command' (empty file)"], None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        return [f"line {exc.lineno}: invalid JSON: {exc.msg}"], None
    resolved, diags = check_config(raw, text)
    return diags, resolved


# --- output -------------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return {"re": x.real.tolist(), "im": x.imag.tolist()}
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"not serializable: {type(x)}")


def write_json(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


# --- commands -----------------------------------------------------------------------

def _frame(p, t):
    from .kernels import EdgeFrame

    return EdgeFrame(complex(p["z0_re"], p["z0_im"]), p["beta"], t)


def cmd_sample(cfg, out, base):
    from . import model, sampler

    p = cfg["parameters"]
    conf = model.EnsembleConfig(p["beta"], p["n"], load_jordan(p["jordan"], base), tau=p["tau"], seed=cfg["seed"])
    samples = []
    for r in range(p["replicas"]):
        if p["center"] is not None:
            samples.append(sampler.window_spectrum(conf, r, p["center"], p["radius"], method=p["method"]))
        else:
            samples.append(sampler.spectrum(conf, r))
    for s in samples:
        s.seconds = 0.0
    sampler.write_spectra_csv(os.path.join(out, "spectra.csv"), samples)
    report = {"replicas": len(samples), "discarded": sum(s.discarded for s in samples),
              "fingerprint": conf.fingerprint(), "eigenvalues": int(sum(s.eigenvalues.size for s in samples))}
    return report, True


def cmd_edge_stats(cfg, out, base):
    from . import edgestat, model

    p = cfg["parameters"]
    spec = load_jordan(p["jordan"], base)
    z0 = complex(p["z0_re"], p["z0_im"])
    t = p["t"]
    if t is None:
        t = model.describe_criticality(spec, z0).t if spec is not None else 0
    frame = _frame(p, t)
    conf = model.EnsembleConfig(p["beta"], p["n"], spec, seed=cfg["seed"])
    fn = edgestat.collect_edge_se if p["beta"] == 4 else edgestat.collect_edge
    rep = fn(conf, frame, window=p["window"], side=p["bins"], replicas=p["replicas"],
             method=p["method"], threads=cfg["threads"])
    rep.write(out)
    return rep.to_dict(), rep.passed


def cmd_kernel_eval(cfg, out, base):
    from . import kernels

    p = cfg["parameters"]
    frame = _frame(p, p["t"])
    re_vals = parse_grid(p["grid"])
    im_vals = parse_grid(p["im_grid"])
    name = os.path.join(out, "kernel.csv")
    pred = kernels.write_grid_csv(name, frame, re_vals, im_vals)
    return {"points": int(pred.size), "file": "kernel.csv"}, True


def build_case(beta, case, budget, seed):
    from .duality import DualityCase

    extra = set(case) - CASE_KEYS
    if extra:
        raise ConfigError(f"case has unknown keys {sorted(extra)}")
    k = case["k"]
    k = tuple(int(x) for x in k) if isinstance(k, list) else int(k)
    return DualityCase(
        beta, int(case["n"]), k, to_matrix(case["a"]),
        x0=to_matrix(case.get("x0")), y0=to_matrix(case.get("y0")),
        sigma=to_matrix(case.get("sigma")), gamma=to_matrix(case.get("gamma")),
        tau=case.get("tau"), budget=int(budget or case.get("budget", 100_000)), seed=seed,
    )


def cmd_duality(cfg, out, base):
    from . import duality

    p = cfg["parameters"]
    case = p["case"]
    if isinstance(case, str):
        path = case if os.path.isabs(case) else os.path.join(base, case)
        with open(path) as fh:
            case = json.load(fh)
    c = build_case(p["beta"], case, p["budget"], cfg["seed"])
    rep = duality.verify_duality(c, threshold=p["threshold"], retry=p["retry"])
    return rep.to_dict(), rep.passed


def cmd_charpoly(cfg, out, base):
    from . import duality

    p = cfg["parameters"]
    cp = duality.make_charpoly(p["beta"], p["n"], p["z"], p["w"], x0=p["x0"], sigma=p["sigma"],
                               gamma=p["gamma"], tau=p["tau"], budget=p["budget"], seed=cfg["seed"])
    rep = duality.verify_charpoly(cp, threshold=p["threshold"])
    return rep.to_dict(), rep.passed


def cmd_integral(cfg, out, base):
    from . import integrals

    p = cfg["parameters"]
    spec = integrals.MatrixIntegralSpec(p["n"], p["t"], p["points"], complex(p["z0_re"], p["z0_im"]),
                                        p["budget"], cfg["seed"], width=p["width"])
    mc = integrals.eval_I2_mc(spec)
    closed = integrals.eval_I2_closed(spec)
    diff = abs(mc.mean.real - closed)
    tol = max(3 * mc.se_real, 0.01 * abs(closed))
    rep = {"mc": mc.mean.real, "mc_se": mc.se_real, "closed": closed, "difference": diff,
           "tolerance": tol, "pass": diff <= tol}
    return rep, rep["pass"]


def cmd_prop13(cfg, out, base):
    from . import integrals

    p = cfg["parameters"]
    rep = integrals.verify_prop13_scalar(p["a"], p["z"], p["n"], budget=p["budget"], seed=cfg["seed"],
                                         disk_radius=p["disk_radius"])
    return rep.to_dict(), rep.passed


def cmd_outlier(cfg, out, base):
    from . import edgestat

    p = cfg["parameters"]
    fit = edgestat.outlier_scaling(p["theta"], p["p"], p["ns"], p["replicas"], p["truncation"],
                                   seed=cfg["seed"], threads=cfg["threads"])
    d = fit.to_dict()
    d["pass"] = abs(fit.slope - fit.expected) <= 0.05
    return d, d["pass"]


def cmd_critical(cfg, out, base):
    from . import edgestat

    p = cfg["parameters"]
    fit = edgestat.critical_scaling(complex(p["z0_re"], p["z0_im"]), p["p"], p["theta_hat"], p["ns"],
                                    p["replicas"], p["window"], seed=cfg["seed"], method=p["method"],
                                    threads=cfg["threads"])
    d = fit.to_dict()
    d["pass"] = d["stable"]
    return d, d["pass"]


COMMANDS = {
    "sample": cmd_sample, "edge-stats": cmd_edge_stats, "kernel-eval": cmd_kernel_eval,
    "duality-check": cmd_duality, "charpoly-check": cmd_charpoly, "integral-check": cmd_integral,
    "prop13-check": cmd_prop13, "outlier-scaling": cmd_outlier, "critical-scaling": cmd_critical,
}


# --- argument parsing ---------------------------------------------------------------

FLAG_ALIASES = {"N": "n", "case": "case", "z0-re": "z0_re", "z0-im": "z0_im"}


class _Parser(argparse.ArgumentParser):
    # usage errors share the generic error status; 2 is reserved for failed checks
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser():
    ap = _Parser(prog="ginlab", description="Deformed Ginibre ensemble laboratory.")
    ap.add_argument("--version", action="version", version=f"ginlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file; flags override its keys")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--threads", type=int)
        for key in schema:
            flags = ["--" + key.replace("_", "-")]
            if key == "n":
                flags.append("--N")
            sp.add_argument(*flags, dest="p_" + key, default=None)
    vp = sub.add_parser("validate")
    vp.add_argument("path")
    return ap


def _flag_value(v):
    try:
        return json.loads(v)
    except (json.JSONDecodeError, TypeError):
        return v


def resolve(args):
    """Merge the config file with flags; returns ``(raw, text, base_dir)``."""
    raw, text, base = {}, "", os.getcwd()
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
        try:
            raw = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config} line {exc.lineno}: invalid JSON: {exc.msg}") from exc
        base = os.path.dirname(os.path.abspath(args.config))
        if raw.get("command", args.command) != args.command:
            raise ConfigError(f"config is for '{raw['command']}', not '{args.command}'")
    raw = dict(raw)
    raw["command"] = args.command
    params = dict(raw.get("parameters", {}))
    for k, v in vars(args).items():
        if k.startswith("p_") and v is not None:
            params[k[2:]] = _flag_value(v)
    raw["parameters"] = params
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw["output_dir"] = args.out
    if args.format is not None:
        raw["format"] = args.format
    if args.threads is not None:
        raw["threads"] = args.threads
    return raw, text, base


def run(raw, text="", base=None):
    """Execute a config mapping; returns the exit status."""
    from . import sampler

    cfg, diags = check_config(raw, text)
    if diags:
        for d in diags:
            print(f"config error: {d}", file=sys.stderr)
        return EXIT_ERROR
    out = cfg["output_dir"]
    os.makedirs(out, exist_ok=True)
    manifest = {
        "version": __version__, "command": cfg["command"], "seed": cfg["seed"],
        "config": raw, "threads": sampler.thread_count(cfg["threads"]), "complete": False,
    }
    t0 = time.perf_counter()
    try:
        report, ok = COMMANDS[cfg["command"]](cfg, out, base or os.getcwd())
    except Exception as exc:  # noqa: BLE001 - reported through the manifest
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        manifest["wall_seconds"] = time.perf_counter() - t0
        write_json(os.path.join(out, "manifest.json"), manifest)
        print(f"error: {manifest['error']}", file=sys.stderr)
        return EXIT_ERROR
    write_json(os.path.join(out, "report.json"), report)
    manifest["complete"] = True
    manifest["pass"] = bool(ok)
    manifest["wall_seconds"] = time.perf_counter() - t0
    write_json(os.path.join(out, "manifest.json"), manifest)
    print(json.dumps({"command": cfg["command"], "pass": bool(ok), "output_dir": out}))
    return EXIT_PASS if ok else EXIT_FAIL


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        diags, resolved = validate_config(args.path)
        if diags:
            for d in diags:
                print(d)
            return EXIT_ERROR
        print(json.dumps(resolved, indent=2, sort_keys=True, default=_jsonable))
        return EXIT_PASS
    try:
        raw, text, base = resolve(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return run(raw, text, base)


if __name__ == "__main__":
    sys.exit(main())
