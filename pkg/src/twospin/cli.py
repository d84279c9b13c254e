"""Command-line entry point.

Data goes to stdout or ``--output``; diagnostics go to stderr.  Numbers are
written with nine significant digits in scientific notation and JSON keys are
sorted, so identical inputs give byte-identical output.

Exit status: 0 success, 1 failed validation checks, 2 precondition
violation, 3 numerical failure, 64 usage error.  ``--config FILE`` reads a JSON object whose keys are the
long flag names of the verb (dashes or underscores); flags given on the
command line override it.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings

import numpy as np

from .errors import InvalidArgument, NumericalFailure, PreconditionError
from .parallel import JOBS_ENV, default_jobs

EXIT_OK, EXIT_FAILED_CHECKS, EXIT_PRECONDITION, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2, 3, 64

VERBS = ("dressed", "resonance", "map", "spectrum", "gapscan", "i12", "table1", "sixstate", "multimode",
         "validate")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def fmt(x):
    return f"{x:.8e}"


def _num(x):
    if x is None:
        return None
    if isinstance(x, (bool, int, str)):
        return x
    x = float(x)
    if not math.isfinite(x):
        return str(x)
    return float(f"{x:.8e}")


def _complex(z):
    z = complex(z)
    return {"re": _num(z.real), "im": _num(z.imag), "abs": _num(abs(z))}


def dump_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    return "\n".join(lines) + "\n"


# parser

def _params_flags(p, need_pair=True):
    g = p.add_argument_group("model")
    if need_pair:
        g.add_argument("--de1", type=float, help="bare transition energy of spin 1 (units of hw0)")
        g.add_argument("--de2", type=float, help="bare transition energy of spin 2")
        g.add_argument("--g1", type=float, help="dimensionless coupling g1 = U1 sqrt(n0) / DE1")
        g.add_argument("--g2", type=float, help="dimensionless coupling g2")
        g.add_argument("--u1", type=float, help="coupling U1 (overrides --g1)")
        g.add_argument("--u2", type=float, help="coupling U2 (overrides --g2)")
    g.add_argument("--hw", type=float, default=1.0, help="oscillator quantum hbar*omega0 (default 1)")


def _common(p):
    p.add_argument("--config", help="JSON file with option values; flags override it")
    p.add_argument("-o", "--output", help="write data here instead of stdout")
    p.add_argument("--jobs", type=int, default=None, help=f"worker processes (default ${JOBS_ENV} or 1)")


def build_parser():
    parser = _Parser(prog="twospin", description="Two spins coupled to one oscillator: dressed energies, "
                     "resonances, exact anticrossings and indirect coupling.")
    sub = parser.add_subparsers(dest="verb", metavar="verb", parser_class=_Parser)

    p = sub.add_parser("dressed", help="dressed transition energy DE(g)")
    p.add_argument("--de", type=float, required=False, help="bare transition energy")
    p.add_argument("--g", type=float, nargs="+", default=[0.0], help="one or more couplings g")
    p.add_argument("--n0", type=int, default=9600, help="oscillator level used to convert g to U")
    p.add_argument("--method", default="harmonic", choices=["harmonic", "wkb"])
    _params_flags(p, need_pair=False)
    _common(p)

    p = sub.add_parser("resonance", help="solve one resonance condition (JSON)")
    _params_flags(p)
    p.add_argument("--n0", type=int, default=9600)
    p.add_argument("--dn", type=int, required=False, help="delta_n (even: transfer, odd: exchange)")
    p.add_argument("--which-spin", type=int, default=1, choices=[1, 2])
    p.add_argument("--method", default="harmonic", choices=["harmonic", "wkb"])
    _common(p)

    p = sub.add_parser("map", help="g2(g1) resonance curves for several even delta_n (CSV)")
    _params_flags(p)
    p.add_argument("--n0", type=int, default=9600)
    p.add_argument("--g1-grid", type=float, nargs=3, metavar=("START", "STOP", "NUM"), default=[0.0, 1.5, 31])
    p.add_argument("--dn", type=int, nargs="+", default=list(range(-10, 11, 2)))
    p.add_argument("--method", default="harmonic", choices=["harmonic", "wkb"])
    _common(p)

    p = sub.add_parser("spectrum", help="exact eigenvalues in an energy interval (CSV)")
    _params_flags(p)
    p.add_argument("--n0", type=int, default=100, help="centre of the Fock window")
    p.add_argument("--halfwidth", type=int, default=None, help="Fock window half-width")
    p.add_argument("--parity", type=int, choices=[-1, 1], default=None)
    p.add_argument("--emin", type=float, required=False, help="interval (emin, emax] relative to n0 hw0")
    p.add_argument("--emax", type=float, required=False)
    p.add_argument("--dump-band", help="also write the banded matrix as (row, col, value) CSV")
    _common(p)

    p = sub.add_parser("gapscan", help="exact anticrossing scan and PT comparison (CSV + JSON)")
    _params_flags(p)
    p.add_argument("--n0", type=int, default=1000)
    p.add_argument("--dn", type=int, required=False)
    p.add_argument("--control", default="g2", choices=["g1", "g2"])
    p.add_argument("--kind", default="transfer", choices=["transfer", "exchange"])
    p.add_argument("--which-spin", type=int, default=1, choices=[1, 2])
    p.add_argument("--halfwidth", type=int, default=None)
    p.add_argument("--span", type=float, default=0.05, help="predicted detuning range in hw0")
    p.add_argument("--points", type=int, default=9)
    p.add_argument("--solver", default="band", choices=["band", "dense"])
    p.add_argument("--no-refine", action="store_true")
    p.add_argument("--summary", help="write the JSON summary here (default stderr)")
    _common(p)

    p = sub.add_parser("i12", help="overlap integral I12 (JSON)")
    _params_flags(p)
    p.add_argument("--n0", type=int, default=9600)
    p.add_argument("--dn", type=int, default=-2)
    p.add_argument("--method", default="both", choices=["numeric", "wkb", "both"])
    p.add_argument("--ppw", type=int, default=48, help="grid points per local wavelength")
    p.add_argument("--dump-levels", metavar="PREFIX", help="write PREFIX_a.csv and PREFIX_b.csv (y, u)")
    _common(p)

    p = sub.add_parser("table1", help="g2 and |I12| along the DE1=11, DE2=15 resonance (CSV)")
    p.add_argument("--de1", type=float, default=11.0)
    p.add_argument("--de2", type=float, default=15.0)
    p.add_argument("--n0", type=int, default=9600)
    p.add_argument("--dn", type=int, default=-2)
    p.add_argument("--g1", type=float, nargs="+", default=[0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
    p.add_argument("--hw", type=float, default=1.0)
    _common(p)

    p = sub.add_parser("sixstate", help="indirect coupling in the six-state model (JSON)")
    _params_flags(p)
    p.add_argument("--n", type=float, required=False, help="oscillator level n")
    p.add_argument("--variant", default="standard", choices=["standard", "conjugate", "lossy"])
    p.add_argument("--gamma", type=float, default=0.0, help="loss rate hbar*Gamma (inf allowed)")
    p.add_argument("--energy", type=float, default=None, help="evaluation energy relative to n hw0")
    _common(p)

    p = sub.add_parser("multimode", help="mode-summed V16 over a separation sweep (CSV)")
    p.add_argument("--spec", required=False, help="JSON mode specification")
    p.add_argument("--lossy", action="store_true", default=None)
    _common(p)

    p = sub.add_parser("validate", help="run an acceptance suite; nonzero exit on failure")
    p.add_argument("--suite", default="quick", choices=["quick", "full"])
    _common(p)
    return parser


def _apply_config(parser, argv):
    """Parse twice: the second pass uses the config file as defaults."""
    args = parser.parse_args(argv)
    if args.verb is None:
        raise UsageError("a verb is required: " + ", ".join(VERBS))
    if not getattr(args, "config", None):
        return args
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.verb]
    known = {a.dest for a in sub._actions}
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    unknown = sorted(set(cfg) - known - {"config"})
    if unknown:
        raise UsageError(f"unknown config keys for {args.verb}: {', '.join(unknown)}")
    cfg.pop("config", None)
    sub.set_defaults(**cfg)
    return parser.parse_args(argv)


# helpers

def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _positive_int(name, value, minimum=1):
    if value is None or int(value) != value or value < minimum:
        raise InvalidArgument(f"--{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def _model(args, n, **kwargs):
    from .model import ModelParams

    _require(args, "de1", "de2")
    u1, u2 = args.u1, args.u2
    root = math.sqrt(n) if n else None
    if u1 is None:
        u1 = 0.0 if args.g1 is None else _g_to_u(args.g1, args.de1, root)
    if u2 is None:
        u2 = 0.0 if args.g2 is None else _g_to_u(args.g2, args.de2, root)
    return ModelParams(args.de1, args.de2, u1, u2, args.hw, **kwargs)


def _g_to_u(g, de, root):
    if root is None:
        raise InvalidArgument("converting g to U needs n >= 1")
    return g * de / root


def _jobs(args):
    jobs = default_jobs() if args.jobs is None else args.jobs
    return _positive_int("jobs", jobs)


class _Out:
    def __init__(self, path):
        self.path = path

    def write(self, text):
        if self.path:
            with open(self.path, "w", newline="\n", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


# verbs

def cmd_dressed(args):
    from .rotated import dressed_energy

    _require(args, "de")
    n0 = _positive_int("n0", args.n0)
    rows = []
    for g in args.g:
        if g < 0:
            raise InvalidArgument("--g must be >= 0")
        rows.append((g, dressed_energy(args.de, g * args.de / math.sqrt(n0), n0, args.method, args.hw)))
    _Out(args.output).write(csv_text(["g", "dressed_energy"], rows))


def cmd_resonance(args):
    from .resonance import solve_energy_exchange_g, solve_resonance_g2

    _require(args, "dn")
    n0 = _positive_int("n0", args.n0)
    if args.dn % 2 == 0:
        _require(args, "g1")
        point = solve_resonance_g2(args.g1, args.dn, _model(args, n0), n0, args.method)
    else:
        point = solve_energy_exchange_g(args.dn, args.which_spin, _model(args, n0), n0, args.method)
    _Out(args.output).write(dump_json({k: _num(v) for k, v in point.as_dict().items()}))


def cmd_map(args):
    from .resonance import resonance_map

    n0 = _positive_int("n0", args.n0)
    start, stop, num = args.g1_grid
    num = _positive_int("g1-grid NUM", num, 2)
    if start < 0 or stop <= start:
        raise InvalidArgument("--g1-grid needs 0 <= START < STOP")
    if any(dn % 2 for dn in args.dn):
        raise InvalidArgument("--dn values must be even")
    grid = np.linspace(start, stop, num)
    curves = resonance_map(_model(args, n0), n0, grid, args.dn, args.method, jobs=_jobs(args))
    rows = []
    for dn in args.dn:
        for g1, pt in zip(grid, curves[dn]):
            rows.append((str(dn), g1, pt.g2 if pt else float("nan"), "1" if pt else "0"))
    _Out(args.output).write(csv_text(["delta_n", "g1", "g2", "exists"], rows))


def cmd_spectrum(args):
    from .eigen import eigenpairs_in_interval
    from .model import FockWindow, assemble_hamiltonian, build_basis, default_halfwidth, spin_characters

    _require(args, "emin", "emax")
    n0 = _positive_int("n0", args.n0)
    if not args.emax > args.emin:
        raise InvalidArgument("--emax must exceed --emin")
    p = _model(args, n0)
    hw = args.halfwidth or default_halfwidth(n0, max(p.g1(n0), p.g2(n0)))
    basis = build_basis(FockWindow.around(n0, _positive_int("halfwidth", hw)), args.parity)
    band = assemble_hamiltonian(p, basis, energy_offset=n0 * p.hbar_omega0)
    if args.dump_band:
        band.to_csv(args.dump_band)
    res = eigenpairs_in_interval(band, args.emin, args.emax)
    sz1, sz2 = spin_characters(basis, res.vectors) if len(res.values) else ([], [])
    rows = [(str(i), e, e + n0 * p.hbar_omega0, a, b) for i, (e, a, b) in enumerate(zip(res.values, sz1, sz2))]
    _Out(args.output).write(csv_text(["index", "energy_rel", "energy", "sz1", "sz2"], rows))


def cmd_gapscan(args):
    from .resonance import ResonanceKind, ScanProblem, splitting_scan

    _require(args, "dn")
    n0 = _positive_int("n0", args.n0)
    points = _positive_int("points", args.points, 3)
    if not args.span > 0:
        raise InvalidArgument("--span must be positive")
    kind = ResonanceKind.EXCITATION_TRANSFER if args.kind == "transfer" else ResonanceKind.ENERGY_EXCHANGE
    problem = ScanProblem(_model(args, n0), n0, args.dn, args.control, kind, args.which_spin,
                          halfwidth=args.halfwidth)
    scan = splitting_scan(problem, args.span, points, refine=not args.no_refine, jobs=_jobs(args),
                          solver=args.solver)
    buf = io.StringIO()
    scan.to_csv(buf)
    _Out(args.output).write(buf.getvalue())
    summary = scan.to_json()
    if args.summary:
        _Out(args.summary).write(summary)
    else:
        sys.stderr.write(summary)


def cmd_i12(args):
    from .rotated import TRANSFER_A, TRANSFER_B, i12_numeric, make_grid, solve_levels
    from .wkb import i12_wkb

    n0 = _positive_int("n0", args.n0)
    ppw = _positive_int("ppw", args.ppw, 12)
    p = _model(args, n0)
    out = {"n0": n0, "delta_n": args.dn}
    if args.method in ("numeric", "both"):
        r = i12_numeric(p, n0, args.dn, points_per_wavelength=ppw)
        out["i12"] = _num(r.value)
        out["i12_coarse"], out["i12_fine"] = _num(r.coarse), _num(r.fine)
    if args.method in ("wkb", "both"):
        w = i12_wkb(p, n0, args.dn)
        out["i12_wkb"] = _num(w.value)
        out["eta_mismatch"] = _num(w.eta_mismatch)
    if args.dump_levels:
        specs = [(TRANSFER_A, n0), (TRANSFER_B, n0 + args.dn)]
        a, b = solve_levels(p, specs, grid=make_grid(p, specs, ppw))
        a.to_csv(args.dump_levels + "_a.csv")
        b.to_csv(args.dump_levels + "_b.csv")
    _Out(args.output).write(dump_json(out))


def cmd_table1(args):
    from .model import ModelParams
    from .resonance import table1, table1_csv

    n0 = _positive_int("n0", args.n0)
    rows = table1(ModelParams(args.de1, args.de2, hbar_omega0=args.hw), n0, args.g1, args.dn,
                  jobs=_jobs(args))
    _Out(args.output).write(table1_csv(rows))


def cmd_sixstate(args):
    from .sixstate import SixStateModel, resonance_energy, six_state_splitting, v16_general

    _require(args, "n")
    if not args.n >= 1:
        raise InvalidArgument("--n must be >= 1")
    gamma = float(args.gamma)
    p = _model(args, args.n, variant=args.variant, gamma=gamma)
    model = SixStateModel(p, args.n)
    if args.energy is None:
        e_rel, c = resonance_energy(model)
        split = six_state_splitting(model)
    else:
        c = v16_general(model, args.energy, relative=True)
        e_rel, split = args.energy, c.splitting
    out = {
        "n": _num(args.n), "variant": p.variant.value, "gamma": _num(gamma),
        "energy_rel": _num(e_rel),
        "v16": _complex(c.v16), "v61": _complex(c.v61),
        "sigma1": _complex(c.sigma1), "sigma6": _complex(c.sigma6),
        "splitting": _num(split),
        "ratio_to_direct": _complex(c.ratio_to_direct),
        "terms": [_complex(t) for t in c.terms],
    }
    _Out(args.output).write(dump_json(out))


def _load_mode_spec(path):
    from .multimode import MultiModeSpec

    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidArgument(f"cannot read mode spec {path}: {exc}") from exc
    try:
        spec = MultiModeSpec(d["k"], d["weights"], d["omega"], d.get("u1", 1.0), d.get("u2", 1.0),
                             d.get("occupation", 0.0), d.get("hbar", 1.0), d.get("pole", "exclude"),
                             d.get("eps", 0.0))
        delta_e1 = float(d["delta_e1"])
    except KeyError as exc:
        raise InvalidArgument(f"mode spec is missing {exc}") from exc
    if "positions" in d:
        seps = [np.subtract(r1, r2) for r1, r2 in d["positions"]]
    else:
        seps = d.get("separations", [0.0])
    return spec, delta_e1, seps, bool(d.get("lossy", False))


def cmd_multimode(args):
    from .multimode import separation_sweep

    _require(args, "spec")
    spec, delta_e1, seps, lossy = _load_mode_spec(args.spec)
    if args.lossy is not None:
        lossy = args.lossy
    values = separation_sweep(spec, delta_e1, seps, lossy)
    rows = [(float(np.linalg.norm(np.atleast_1d(r))), v.real, v.imag, abs(v)) for r, v in zip(seps, values)]
    _Out(args.output).write(csv_text(["separation", "re_v16", "im_v16", "abs_v16"], rows))


def cmd_validate(args):
    from .validation import run_suite

    lines = []

    def report(check):
        sys.stderr.write(check.line() + "\n")
        sys.stderr.flush()
        lines.append(check.line())

    checks = run_suite(args.suite, jobs=_jobs(args), report=report)
    failed = [c for c in checks if not c.passed]
    if args.output:
        _Out(args.output).write("\n".join(lines) + "\n")
    sys.stderr.write(f"{len(checks) - len(failed)}/{len(checks)} checks passed\n")
    return EXIT_FAILED_CHECKS if failed else EXIT_OK


COMMANDS = {name: globals()["cmd_" + name] for name in VERBS}


def main(argv=None):
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda m, c, *a, **k: sys.stderr.write(f"warning: {c.__name__}: {m}\n")
            status = COMMANDS[args.verb](args)
        return EXIT_OK if status is None else status
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_PRECONDITION
    except NumericalFailure as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
