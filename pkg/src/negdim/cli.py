"""Command-line front-end emitting reproducible CSV/JSON/TSV artifacts.

Every file-writing invocation also writes a manifest JSON next to its
first output: command, full parameter set, seed, tool version, and
SHA-256 digests of all inputs and outputs.  Outputs are written
atomically (temp file + rename) and are byte-stable given identical
flags, seed, and inputs.

Exit codes: 0 success, 2 domain/validation error, 3 non-convergence.
"""

import argparse
import hashlib
import json
import os
import sys
import tempfile

from . import __version__
from .bose_model import (
    BoseParams,
    EnsembleConstraints,
    LevelSpectrum,
    energy_sum,
    solve_beta_nu,
    solve_nu,
    total_occupation,
)
from .concentration import (
    ConcentrationConfig,
    concentration_report,
    report_rows_to_csv,
    unit_integer_family,
)
from .corpus import (
    TokenizerConfig,
    condensate_fraction,
    curve_from_csv,
    curve_to_csv,
    dictionary_to_tsv,
    frequency_dictionary,
    frequency_spectrum,
    inverted_rank_curve,
    spectrum_from_csv,
    spectrum_to_csv,
    tokenize,
)
from .errors import (
    BudgetExceededError,
    CalibrationError,
    ConvergenceError,
    DomainError,
    ValidationError,
)
from .fitting import FitConfig, alpha_sweep, calibrate_two_point, mean_quadratic_error
from .weights import is_pole, weight_sequence

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_NONCONVERGENT = 3


def _sha256_file(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _atomic_write_text(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".negdim-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_outputs(command, params, inputs, outputs, seed=None):
    """Atomically write output files, then the manifest beside the first."""
    for path, text in outputs.items():
        _atomic_write_text(path, text)
    manifest = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "parameters": {k: params[k] for k in sorted(params)},
        "inputs": {p: _sha256_file(p) for p in inputs},
        "outputs": {p: _sha256_file(p) for p in outputs},
    }
    first = next(iter(outputs))
    _atomic_write_text(first + ".manifest.json", json.dumps(manifest, indent=2) + "\n")


def _read_spectrum_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "x,q":
        raise DomainError(f"spectrum file {path} must start with header 'x,q'")
    pairs = []
    for ln in lines[1:]:
        x_s, q_s = ln.split(",")
        pairs.append((float(x_s), float(q_s)))
    return LevelSpectrum.from_pairs(pairs)


def _emit(text, out_path, command, params, inputs, seed=None):
    if out_path:
        _write_outputs(command, params, inputs, {out_path: text}, seed=seed)
        print(f"wrote {out_path}")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_weights(args):
    seq = weight_sequence(
        args.dim, args.imax, normalization="raw" if args.raw_gamma else "unit"
    )
    lines = ["i,weight"]
    for i, value in enumerate(seq):
        lines.append(f"{i},pole" if is_pole(value) else f"{i},{value!r}")
    text = "\n".join(lines) + "\n"
    params = {"dim": args.dim, "imax": args.imax, "raw_gamma": args.raw_gamma}
    _emit(text, args.out, "weights", params, [])
    return EXIT_OK


def cmd_solve(args):
    spec = _read_spectrum_file(args.spectrum)
    if args.energy is not None:
        n = int(args.n_total)
        if n != args.n_total:
            raise DomainError("N must be an integer when an energy budget is given")
        params = solve_beta_nu(spec, EnsembleConstraints(n, args.energy))
        residual_e = (energy_sum(spec, params) - args.energy) / max(abs(args.energy), 1e-300)
    else:
        params = BoseParams(args.beta, solve_nu(spec, args.beta, args.n_total))
        residual_e = None
    residual_n = (total_occupation(spec, params) - args.n_total) / args.n_total
    payload = {
        "beta": params.beta,
        "nu": params.nu,
        "residual_n": residual_n,
        "residual_e": residual_e,
        "condensate_gap": params.gap(spec),
    }
    text = json.dumps(payload, indent=2) + "\n"
    cli_params = {
        "spectrum": args.spectrum,
        "n_total": args.n_total,
        "energy": args.energy,
        "beta": args.beta,
    }
    _emit(text, args.out, "solve", cli_params, [args.spectrum])
    return EXIT_OK


def cmd_concentrate(args):
    n_grid = [int(tok) for tok in args.n_grid.split(",") if tok]
    if not n_grid:
        raise DomainError("empty N grid")
    cfg = ConcentrationConfig(
        epsilon=args.epsilon, n_samples=args.samples, seed=args.seed
    )
    instances = unit_integer_family(
        n_grid, s_frac=args.s_frac, energy_frac=args.energy_frac
    )
    rows = concentration_report(instances, cfg)
    text = report_rows_to_csv(rows)
    params = {
        "n_grid": args.n_grid,
        "s_frac": args.s_frac,
        "energy_frac": args.energy_frac,
        "epsilon": args.epsilon,
        "samples": args.samples,
    }
    _emit(text, args.out, "concentrate", params, [], seed=args.seed)
    return EXIT_OK


def cmd_dict(args):
    cfg = TokenizerConfig(keep_hyphens=args.keep_hyphens, min_length=args.min_length)
    tokens = []
    for path in args.inputs:
        with open(path, "r", encoding="utf-8") as fh:
            tokens.extend(tokenize(fh.read(), cfg))
    fdict = frequency_dictionary(tokens)
    if fdict.dict_size == 0:
        raise DomainError("no tokens survived tokenization")
    spectrum = frequency_spectrum(fdict)
    outputs = {args.dict_out: dictionary_to_tsv(fdict),
               args.spectrum_out: spectrum_to_csv(spectrum)}
    if args.curve_out:
        curve = inverted_rank_curve(spectrum, args.cut_low, args.cut_high)
        outputs[args.curve_out] = curve_to_csv(curve)
    params = {
        "inputs": list(args.inputs),
        "keep_hyphens": args.keep_hyphens,
        "min_length": args.min_length,
        "cut_low": args.cut_low,
        "cut_high": args.cut_high,
        "curve_out": args.curve_out,
    }
    _write_outputs("dict", params, list(args.inputs), outputs)
    hapax = condensate_fraction(spectrum)
    print(
        f"tokens={fdict.total_tokens} distinct={fdict.dict_size} "
        f"condensate_fraction={hapax:.4f}"
    )
    for path in outputs:
        print(f"wrote {path}")
    return EXIT_OK


def _load_curve(args):
    if (args.spectrum is None) == (args.curve is None):
        raise DomainError("provide exactly one of --spectrum or --curve")
    if args.curve is not None:
        if args.cut_low or args.cut_high:
            raise DomainError("cuts apply to --spectrum input, not --curve")
        with open(args.curve, "r", encoding="utf-8") as fh:
            return curve_from_csv(fh.read()), args.curve
    with open(args.spectrum, "r", encoding="utf-8") as fh:
        spectrum = spectrum_from_csv(fh.read())
    return inverted_rank_curve(spectrum, args.cut_low, args.cut_high), args.spectrum


def cmd_fit(args):
    curve, input_path = _load_curve(args)
    cfg = FitConfig(
        omega1=args.omega1, omega2=args.omega2, alpha=args.alpha,
        beta=args.beta, mode=args.mode,
    )
    fit = calibrate_two_point(curve, cfg)
    fit = mean_quadratic_error(curve, fit, cfg)
    text = json.dumps(fit.to_json_dict(), indent=2) + "\n"
    params = {
        "input": input_path,
        "cut_low": args.cut_low,
        "cut_high": args.cut_high,
        "omega1": args.omega1,
        "omega2": args.omega2,
        "alpha": args.alpha,
        "beta": args.beta,
        "mode": args.mode,
    }
    _emit(text, args.out, "fit", params, [input_path])
    return EXIT_OK


def cmd_sweep(args):
    curve, input_path = _load_curve(args)
    template = FitConfig(
        omega1=args.omega1, omega2=args.omega2,
        alpha=2.02 / args.omega1 + 1.0,  # placeholder; replaced per point
        beta=args.beta, mode=args.mode,
    )
    result = alpha_sweep(curve, args.alpha_from, args.alpha_to, args.step, template)
    text = result.to_csv()
    params = {
        "input": input_path,
        "cut_low": args.cut_low,
        "cut_high": args.cut_high,
        "omega1": args.omega1,
        "omega2": args.omega2,
        "from": args.alpha_from,
        "to": args.alpha_to,
        "step": args.step,
        "beta": args.beta,
        "mode": args.mode,
    }
    _emit(text, args.out, "sweep", params, [input_path])
    print(f"best_alpha={result.best_alpha!r}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser and dispatch
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="negdim",
        description="Occupancy statistics for real lattice dimension: "
        "weights, solvers, concentration runs, and rank-curve fits.",
    )
    parser.add_argument("--version", action="version", version=f"negdim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weights", help="multiplicity weight sequence as CSV")
    p.add_argument("--dim", type=float, required=True)
    p.add_argument("--imax", type=int, required=True)
    p.add_argument("--raw-gamma", action="store_true",
                   help="drop the 1/Gamma(D) factor (needed at non-positive integer D)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("solve", help="solve nu (and beta, with --energy) as JSON")
    p.add_argument("--spectrum", required=True, help="CSV file with header x,q")
    p.add_argument("--n-total", type=float, required=True)
    p.add_argument("--energy", type=float, default=None)
    p.add_argument("--beta", type=float, default=1.0,
                   help="inverse temperature for the nu-only mode (default 1.0)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("concentrate", help="concentration report over an N grid")
    p.add_argument("--n-grid", required=True, help="comma-separated N values")
    p.add_argument("--s-frac", type=float, default=0.25)
    p.add_argument("--energy-frac", type=float, default=0.6)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_concentrate)

    p = sub.add_parser("dict", help="frequency dictionary, spectrum, optional curve")
    p.add_argument("inputs", nargs="+", help="UTF-8 text files")
    p.add_argument("--keep-hyphens", action="store_true")
    p.add_argument("--min-length", type=int, default=1)
    p.add_argument("--dict-out", required=True)
    p.add_argument("--spectrum-out", required=True)
    p.add_argument("--curve-out", default=None)
    p.add_argument("--cut-low", type=int, default=0)
    p.add_argument("--cut-high", type=int, default=0)
    p.set_defaults(func=cmd_dict)

    for name, func in (("fit", cmd_fit), ("sweep", cmd_sweep)):
        p = sub.add_parser(name, help=f"{name} the rank model on a curve")
        p.add_argument("--spectrum", default=None, help="CSV file omega,count")
        p.add_argument("--curve", default=None, help="CSV file omega,inverted_rank")
        p.add_argument("--cut-low", type=int, default=0)
        p.add_argument("--cut-high", type=int, default=0)
        p.add_argument("--omega1", type=int, required=True)
        p.add_argument("--omega2", type=int, required=True)
        p.add_argument("--beta", type=float, default=0.0)
        p.add_argument("--mode", default="auto",
                       choices=["auto", "discrete", "quadrature", "closed-beta0"])
        p.add_argument("--out", default=None)
        if name == "fit":
            p.add_argument("--alpha", type=float, required=True)
        else:
            p.add_argument("--from", dest="alpha_from", type=float, required=True)
            p.add_argument("--to", dest="alpha_to", type=float, required=True)
            p.add_argument("--step", type=float, required=True)
        p.set_defaults(func=func)

    return parser


def _check_thread_env():
    raw = os.environ.get("NEGDIM_THREADS")
    if raw is None:
        return
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(f"NEGDIM_THREADS must be a positive integer, got {raw!r}")
    if value < 1:
        raise DomainError(f"NEGDIM_THREADS must be a positive integer, got {raw!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _check_thread_env()
        return args.func(args)
    except (ValidationError, DomainError, BudgetExceededError,
            FileNotFoundError, UnicodeDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ConvergenceError, CalibrationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENT


if __name__ == "__main__":
    sys.exit(main())
