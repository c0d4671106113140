"""Command-line driver for reproducible experiments.

One subcommand per construction: Gram/positivity checks, bandlimited and
Fourier-coefficient reconstruction, average sampling, regularized learning,
perturbation admissibility, shift-space diagnostics, stability sweeps and
vector-valued sampling sets. Every run writes a manifest echoing the fully
resolved configuration, so reruns are byte-reproducible.

Exit codes: 0 success, 2 validation error, 3 numerical/conditioning error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import Grid, GridFunction, rng
from .exceptions import ConditioningError, OpkernError
from .families import AverageSamplingFamily, FourierCoefficientFamily
from .frames import dual_frame, frame_bounds_estimate, interior_relative_error, reconstruct, truncated_frame
from .kernels import GramMatrix, KernelSection, feature_gram, gram, psd_check
from .learning import (
    learning_problem,
    perturb_samples,
    regnet_solve,
    sampling_operator,
    stability_sweep,
    truncated_reconstruction_stability,
)
from .paley_wiener import (
    BandlimitedSignal,
    build_vector_sampling_set,
    generalized_kadec_check,
    kadec_bounds,
    pw_kernel_section,
    pw_window,
    sinc_kernel,
    synthesize,
    vector_features,
    w_grid_default,
)
from .shift_invariant import (
    bracket_function,
    bracket_tail_estimate,
    dual_generator,
    fourier_coefficient_identity_check,
    make_generator,
    density_diagnostic,
)
from .families import AverageFunctional, SampleSet

FMT = "%.15g"


def _fmt(x: float) -> str:
    return FMT % x


def _fmt_complex(z: complex) -> str:
    return f"{_fmt(z.real)}{'+' if z.imag >= 0 else '-'}{_fmt(abs(z.imag))}j"


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(prefix: Path, command: str, config: dict) -> None:
    _write_json(
        prefix.with_suffix(".manifest.json"),
        {"command": command, "config": config, "version": __version__},
    )


def _write_gram_csv(path: Path, g: GramMatrix) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    labels = [str(a) for a, _ in g.indices]
    lines = ["index," + ",".join(labels)]
    for lab, row in zip(labels, g.matrix):
        lines.append(lab + "," + ",".join(_fmt_complex(z) for z in row))
    path.write_text("\n".join(lines) + "\n")


def _write_function_csv(path: Path, f: GridFunction) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    x = f.grid.points()
    lines = ["x," + ",".join(f"re{l},im{l}" for l in range(f.dim))]
    for i in range(f.grid.n):
        cells = [_fmt(x[i])]
        for l in range(f.dim):
            z = f.values[i, l]
            cells += [_fmt(z.real), _fmt(z.imag)]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


def _parse_indices(text: str) -> list:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [float(tok) if "." in tok else int(tok) for tok in text.split(",") if tok]


def _apply_config_file(args: argparse.Namespace) -> dict:
    """Resolve the effective config: file values override flags."""
    config = {k: v for k, v in vars(args).items() if k not in {"func", "config"}}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            overrides = json.load(fh)
        for key, value in overrides.items():
            key = key.replace("-", "_")
            if key not in config:
                raise OpkernError(f"unknown config key {key!r}")
            config[key] = value
            setattr(args, key, value)
    return config


def _load_signal(path: str) -> BandlimitedSignal:
    with open(path) as fh:
        return BandlimitedSignal.from_json(json.load(fh))


def _window_grid(args) -> Grid:
    """Evaluation window [-T, T]: T defaults to the index half-width plus a
    truncation pad of 16, overridable through --window."""
    if getattr(args, "window", None):
        t_half = float(args.window)
        n = 2 * int(round(t_half * args.points_per_unit)) + 1
        return Grid(-t_half, t_half, n)
    return pw_window(args.m, points_per_unit=args.points_per_unit)


def _pw_sections(centers, delta, profile, window_grid, w_n, quad_n=4097):
    wg = w_grid_default(w_n)
    return [
        pw_kernel_section(AverageFunctional(float(x), delta, profile), window_grid, w_grid=wg, quad_n=quad_n)
        for x in centers
    ]


def _fourier_grid(n: int) -> Grid:
    return Grid(0.0, 2.0 * math.pi, n)


def _fourier_sections(indices, grid: Grid):
    fam = FourierCoefficientFamily()
    out = []
    for j in indices:
        basis = fam.basis_function(int(j), grid)
        out.append(KernelSection(alpha=int(j), xi=np.array([1.0 + 0j]), h_repr=basis, w_repr=basis))
    return out


def _sinc_point_sections(points, window_grid: Grid, w_n: int):
    wg = w_grid_default(w_n)
    t = wg.points()
    x_axis = window_grid.points()
    out = []
    for x in points:
        h = GridFunction(window_grid, sinc_kernel(x_axis, float(x)).astype(complex))
        w = GridFunction(wg, np.exp(1j * float(x) * t) / math.sqrt(2.0 * math.pi))
        out.append(KernelSection(alpha=float(x), xi=np.array([1.0 + 0j]), h_repr=h, w_repr=w))
    return out


def _sections_for_family(args, window_grid):
    if args.family == "fourier":
        grid = _fourier_grid(args.grid_n)
        return _fourier_sections(_parse_indices(args.indices), grid)
    if args.family == "average":
        return _pw_sections(
            _parse_indices(args.indices), args.delta, args.profile, window_grid, args.w_n
        )
    if args.family == "point":
        return _sinc_point_sections(_parse_indices(args.indices), window_grid, args.w_n)
    raise OpkernError(f"unsupported family {args.family!r}")


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_gram(args) -> int:
    config = _apply_config_file(args)
    window_grid = _window_grid(args)
    sections = _sections_for_family(args, window_grid)
    g = gram(sections)
    prefix = Path(args.out)
    _write_gram_csv(prefix.with_suffix(".csv"), g)
    _write_manifest(prefix, "gram", config)
    return 0


def _cmd_psd(args) -> int:
    config = _apply_config_file(args)
    window_grid = _window_grid(args)
    sections = _sections_for_family(args, window_grid)
    g = gram(sections)
    report = psd_check(g)
    prefix = Path(args.out)
    _write_json(
        prefix.with_suffix(".json"),
        {
            "min_eig": report.min_eig,
            "max_eig": report.max_eig,
            "pass": report.passed,
            "asymmetry": g.asymmetry,
        },
    )
    _write_manifest(prefix, "psd", config)
    return 0


def _cmd_kadec(args) -> int:
    config = _apply_config_file(args)
    a, b = kadec_bounds(args.delta)
    if args.delta > 0:
        check = generalized_kadec_check(a, b, args.delta)
        passed, margin = check.passed, check.margin
    else:
        passed, margin = True, 1.0
    prefix = Path(args.out)
    _write_json(prefix.with_suffix(".json"), {"A": a, "B": b, "pass": passed, "margin": margin})
    _write_manifest(prefix, "kadec", config)
    return 0


def _cmd_reconstruct(args) -> int:
    config = _apply_config_file(args)
    signal = _load_signal(args.signal)
    prefix = Path(args.out)
    if args.space == "pw":
        window_grid = _window_grid(args)
        centers = list(range(-args.m, args.m + 1))
        sections = _pw_sections(centers, args.delta, args.profile, window_grid, args.w_n)
        frame = truncated_frame(sections)
        dual = dual_frame(frame, rel_cutoff=args.rel_cutoff)
        f_grid = synthesize(signal, window_grid)
        family = AverageSamplingFamily(delta=args.delta, profile=args.profile)
        samples = sampling_operator(family, [float(c) for c in centers], f_grid)
        f_hat = reconstruct(dual, samples)
        err = interior_relative_error(f_hat, f_grid, margin=4.0)
    elif args.space == "fourier":
        grid = _fourier_grid(args.grid_n)
        indices = list(range(-args.m, args.m + 1))
        sections = _fourier_sections(indices, grid)
        frame = truncated_frame(sections)
        dual = dual_frame(frame, rel_cutoff=args.rel_cutoff)
        x = grid.points()
        shifts = signal.shifts
        vals = (np.exp(1j * np.outer(x, shifts)) @ signal.coeffs[:, 0]) / math.sqrt(2.0 * math.pi)
        f_grid = GridFunction(grid, vals)
        family = FourierCoefficientFamily()
        samples = sampling_operator(family, indices, f_grid)
        f_hat = reconstruct(dual, samples)
        err = interior_relative_error(f_hat, f_grid, window=(grid.a, grid.b))
    else:
        raise OpkernError(f"unknown space {args.space!r}")
    _write_function_csv(prefix.with_suffix(".csv"), f_hat)
    _write_json(prefix.with_suffix(".function.json"), f_hat.to_json())
    _write_json(
        prefix.with_suffix(".json"),
        {
            "rel_l2_interior": err.rel_l2,
            "window": list(err.window),
            "abs_l2": err.abs_l2,
            "ref_l2": err.ref_l2,
            "frame_size": len(frame),
        },
    )
    _write_manifest(prefix, "reconstruct", config)
    return 0


def _cmd_avg_sample(args) -> int:
    config = _apply_config_file(args)
    signal = _load_signal(args.signal)
    window_grid = _window_grid(args)
    f_grid = synthesize(signal, window_grid)
    family = AverageSamplingFamily(delta=args.delta, profile=args.profile)
    xs = [float(v) for v in _parse_indices(args.x)]
    samples = sampling_operator(family, xs, f_grid)
    prefix = Path(args.out)
    _write_json(prefix.with_suffix(".json"), samples.to_json())
    _write_manifest(prefix, "avg-sample", config)
    return 0


def _cmd_regnet(args) -> int:
    config = _apply_config_file(args)
    with open(args.problem) as fh:
        payload = json.load(fh)
    fam_desc = payload["family"]
    indices = payload["indices"]
    lam = float(payload["lambda"])
    window_grid = _window_grid(args)
    if fam_desc["family"] == "fourier":
        grid = _fourier_grid(args.grid_n)
        sections = _fourier_sections([int(j) for j in indices], grid)
        family = FourierCoefficientFamily()
        indices = [int(j) for j in indices]
    elif fam_desc["family"] == "average":
        delta = float(fam_desc["params"]["delta"])
        profile = fam_desc["params"].get("profile", "box")
        indices = [float(x) for x in indices]
        sections = _pw_sections(indices, delta, profile, window_grid, args.w_n)
        family = AverageSamplingFamily(delta=delta, profile=profile)
    else:
        raise OpkernError(f"unsupported learning family {fam_desc['family']!r}")
    if payload.get("samples") is not None:
        values = tuple(complex(re, im) for re, im in payload["samples"])
        samples = SampleSet(family.descriptor(), tuple(indices), values)
    elif payload.get("signal") is not None:
        signal = BandlimitedSignal.from_json(payload["signal"])
        target = (
            synthesize(signal, window_grid)
            if fam_desc["family"] == "average"
            else GridFunction(
                _fourier_grid(args.grid_n),
                (
                    np.exp(1j * np.outer(_fourier_grid(args.grid_n).points(), signal.shifts))
                    @ signal.coeffs[:, 0]
                )
                / math.sqrt(2.0 * math.pi),
            )
        )
        samples = sampling_operator(family, indices, target)
    else:
        raise OpkernError("problem file needs either samples or a signal")
    noise = payload.get("noise")
    if noise:
        samples = perturb_samples(samples, float(noise["sigma"]), int(noise["seed"]))
    problem = learning_problem(sections, samples, lam)
    solution = regnet_solve(problem)
    prefix = Path(args.out)
    _write_json(
        prefix.with_suffix(".json"),
        {
            "eta": [[float(z.real), float(z.imag)] for z in solution.eta],
            "residual": solution.residual,
            "lambda": lam,
        },
    )
    _write_function_csv(prefix.with_suffix(".csv"), solution.f0)
    _write_manifest(prefix, "regnet", config)
    return 0


def _cmd_si_diagnose(args) -> int:
    config = _apply_config_file(args)
    gen = make_generator(args.generator)
    xi = np.linspace(-math.pi, math.pi, 257)
    bracket = bracket_function(gen, xi)
    dual = dual_generator(gen, args.k_max)
    shifts = range(-4, 5)
    biorth = 0.0
    pts = dual.phi_tilde.grid.points()
    w = dual.phi_tilde.grid.weights()
    for j in shifts:
        overlap = np.conj(gen.evaluate(pts - j)) * dual.phi_tilde.values[:, 0]
        val = np.sum(w * overlap)
        biorth = max(biorth, abs(val - (1.0 if j == 0 else 0.0)))
    u = AverageFunctional(args.center, args.delta, args.profile)
    deviation = fourier_coefficient_identity_check(gen, u, k_range=args.k_range)
    centers = [args.center + i * 0.5 for i in range(args.n_centers)]
    family = [AverageFunctional(c, args.delta, args.profile) for c in centers]
    density = density_diagnostic(gen, family, Grid(-math.pi, math.pi, 257))
    prefix = Path(args.out)
    _write_json(
        prefix.with_suffix(".json"),
        {
            "generator": args.generator,
            "bracket_min": float(bracket.min()),
            "bracket_max": float(bracket.max()),
            "bracket_tail_estimate": bracket_tail_estimate(gen),
            "biorthogonality_residual": float(biorth),
            "coefficient_identity_deviation": deviation,
            "density_rank": density.rank,
            "density_family_size": density.family_size,
            "density_smallest_singular": density.smallest_singular,
        },
    )
    _write_manifest(prefix, "si-diagnose", config)
    return 0


def _cmd_stability(args) -> int:
    config = _apply_config_file(args)
    window_grid = _window_grid(args)
    centers = list(range(-args.m, args.m + 1))
    sections = _pw_sections(centers, args.delta, args.profile, window_grid, args.w_n)
    frame = truncated_frame(sections)
    dual = dual_frame(frame)
    sizes = [int(s) for s in args.sizes.split(",")]
    trunc = truncated_reconstruction_stability(frame, dual, args.trials, sizes, args.seed)
    family = AverageSamplingFamily(delta=args.delta, profile=args.profile)
    sweep = stability_sweep(
        family, [float(c) for c in centers], args.lam, args.trials, args.seed, sections, sizes
    )
    a_est, b_est = frame_bounds_estimate(frame)
    prefix = Path(args.out)
    _write_json(
        prefix.with_suffix(".json"),
        {
            "truncated": {
                "per_size": {str(k): v for k, v in trunc.per_size.items()},
                "c_emp": trunc.c_emp,
                "envelope": trunc.envelope,
                "pass": trunc.passed,
            },
            "tikhonov": {
                "per_size": {str(k): v for k, v in sweep.per_size.items()},
                "c_emp": sweep.c_emp,
                "lambda": sweep.lam,
                "pass": sweep.passed,
            },
            "frame_bounds": [a_est, b_est],
            "trials": args.trials,
            "seed": args.seed,
        },
    )
    lines = ["size,truncated_ratio,damped_ratio"]
    for size in sizes:
        lines.append(
            f"{size},{_fmt(trunc.per_size.get(size, float('nan')))},"
            f"{_fmt(sweep.per_size.get(size, float('nan')))}"
        )
    csv_path = prefix.with_suffix(".csv")
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text("\n".join(lines) + "\n")
    _write_manifest(prefix, "stability", config)
    return 0


def _cmd_vector_sampling(args) -> int:
    config = _apply_config_file(args)
    if args.perturb > 0:
        gen = rng(args.seed)
        offsets = {
            m: gen.uniform(-args.perturb, args.perturb, size=args.n)
            for m in range(-args.m_range, args.m_range + 1)
        }
        vss = build_vector_sampling_set(args.n, args.m_range, perturb=lambda m: offsets[m])
    else:
        vss = build_vector_sampling_set(args.n, args.m_range)
    feats = vector_features(vss, w_grid_default(args.w_n))
    g = feature_gram(feats)
    n = args.n
    offblock = 0.0
    for j in range(g.shape[0]):
        for k in range(g.shape[1]):
            if (j % n) != (k % n):
                offblock = max(offblock, abs(g[j, k]))
    prefix = Path(args.out)
    payload = vss.to_json()
    payload["cross_block_max"] = offblock
    _write_json(prefix.with_suffix(".json"), payload)
    _write_manifest(prefix, "vector-sampling", config)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="opkern_out/run", help="output path prefix")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="JSON file overriding flags")


def _add_pw_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--profile", default="box", choices=["box", "triangle", "cosine"])
    p.add_argument("--m", type=int, default=16, help="index half-width / window half-size")
    p.add_argument("--grid-n", dest="grid_n", type=int, default=513)
    p.add_argument("--w-n", dest="w_n", type=int, default=2049)
    p.add_argument("--points-per-unit", dest="points_per_unit", type=int, default=32)
    p.add_argument(
        "--window", dest="window", type=float, default=None,
        help="evaluation half-width T (default: m + 16)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opkern", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gram", help="assemble a kernel Gram matrix")
    p.add_argument("--family", default="fourier", choices=["fourier", "average", "point"])
    p.add_argument("--indices", default="-2..2")
    _add_pw_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_gram)

    p = sub.add_parser("psd", help="positivity report for a kernel Gram")
    p.add_argument("--family", default="fourier", choices=["fourier", "average", "point"])
    p.add_argument("--indices", default="-2..2")
    _add_pw_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_psd)

    p = sub.add_parser("kadec", help="perturbation admissibility bounds")
    p.add_argument("--delta", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_kadec)

    p = sub.add_parser("reconstruct", help="reconstruct a signal from functional samples")
    p.add_argument("--space", default="pw", choices=["pw", "fourier"])
    p.add_argument("--signal", required=True, help="signal JSON path")
    p.add_argument("--rel-cutoff", dest="rel_cutoff", type=float, default=1e-10)
    _add_pw_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("avg-sample", help="apply average functionals to a signal")
    p.add_argument("--signal", required=True)
    p.add_argument("--x", required=True, help="centers, e.g. '-4..4' or '0.5,1.5'")
    _add_pw_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_avg_sample)

    p = sub.add_parser("regnet", help="regularized learning from functional samples")
    p.add_argument("--problem", required=True, help="problem JSON path")
    _add_pw_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_regnet)

    p = sub.add_parser("si-diagnose", help="shift-space generator diagnostics")
    p.add_argument("--generator", default="hat", choices=["box", "hat", "cubic"])
    p.add_argument("--k-max", dest="k_max", type=int, default=20)
    p.add_argument("--k-range", dest="k_range", type=int, default=4)
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--profile", default="triangle", choices=["box", "triangle", "cosine"])
    p.add_argument("--center", type=float, default=0.25)
    p.add_argument("--n-centers", dest="n_centers", type=int, default=3)
    _add_common(p)
    p.set_defaults(func=_cmd_si_diagnose)

    p = sub.add_parser("stability", help="stability sweep of reconstruction operators")
    p.add_argument("--sizes", default="4,8,16")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--lambda", dest="lam", type=float, default=0.1)
    _add_pw_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("vector-sampling", help="build a vector-valued sampling set")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m-range", dest="m_range", type=int, default=16)
    p.add_argument("--perturb", type=float, default=0.0)
    p.add_argument("--w-n", dest="w_n", type=int, default=1025)
    _add_common(p)
    p.set_defaults(func=_cmd_vector_sampling)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConditioningError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 3
    except (OpkernError, FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
