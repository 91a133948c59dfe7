"""Command-line entry point.

One executable, `gleason-csm`, with a subcommand per experiment:
gleason-fit, frame-check, piron-demo, magic-check, csm-sim, measure-demo,
unitary-path.  Every randomized subcommand requires an explicit --seed (no
wall-clock default), outputs are schema-versioned JSON (or CSV tables) with
sorted keys and no timestamps, so identical configurations give
byte-identical files.  Exit codes: 0 for a passing verdict, 1 for a
negative verdict (e.g. NOT_REGULAR, a failed hypothesis, a failed
statistical check), 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import csm, frame, pipeline, scalar, serialization, sphere
from .errors import GleasonCsmError, HypothesesNotMet, MonotonicityViolation
from .hilbert import Field, UnitVector, random_basis, unitary_path_to_permutation
from .seeding import child_rng
from .tolerances import DEFAULT

EXIT_PASS = 0
EXIT_VERDICT = 1
EXIT_USAGE = 2


@dataclass
class RunConfig:
    """Validated invocation parameters for one subcommand."""

    subcommand: str
    dim: int | None = None
    field: Field = Field.COMPLEX
    trials: int = 100_000
    seed: int | None = None
    input_path: Path | None = None
    output_path: Path | None = None
    csv_path: Path | None = None
    tolerance: float | None = None


def _write_text(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _emit_json(payload: dict, path: Path | None) -> None:
    _write_text(path, serialization.dumps_canonical(serialization.with_schema(payload)))


def _emit_csv(rows: list[list], header: list[str], path: Path | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _write_text(path, buf.getvalue())


def _load_json(path: Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_gleason_fit(cfg: RunConfig, samples: int) -> int:
    f = serialization.frame_function_from_json(_load_json(cfg.input_path))
    if cfg.dim is not None and cfg.dim != f.dim:
        raise GleasonCsmError(f"--dim {cfg.dim} does not match fixture dim {f.dim}")
    report = frame.reconstruct_rho(f, samples, cfg.seed)
    payload = report.to_json()
    if cfg.tolerance is not None and payload["verdict"] != "VIOLATES_FRAME":
        payload["residual_tolerance"] = cfg.tolerance
        payload["verdict"] = (
            "REGULAR" if report.max_residual <= cfg.tolerance else "NOT_REGULAR"
        )
    _emit_json(payload, cfg.output_path)
    return EXIT_PASS if payload["verdict"] == "REGULAR" else EXIT_VERDICT


def _cmd_frame_check(cfg: RunConfig, n_bases: int, use_stored: bool) -> int:
    f = serialization.frame_function_from_json(_load_json(cfg.input_path))
    bases = None
    if use_stored or (f.kind is frame.FrameKind.TABULATED):
        bases = f.stored_bases()
        if not bases:
            bases = None
    report = frame.check_frame_condition(f, n_bases, cfg.seed if cfg.seed is not None else 0, bases=bases)
    threshold = cfg.tolerance if cfg.tolerance is not None else DEFAULT.frame_condition
    payload = report.to_json()
    payload["threshold"] = threshold
    payload["passed"] = report.max_deviation <= threshold
    payload["checked_stored_bases"] = bases is not None
    _emit_json(payload, cfg.output_path)
    return EXIT_PASS if payload["passed"] else EXIT_VERDICT


def _cmd_piron_demo(
    cfg: RunConfig,
    lat_u: float,
    lat_v: float,
    lon_u: float,
    lon_v: float,
    max_len: int,
) -> int:
    pole = np.array([0.0, 0.0, 1.0])

    def on_sphere(h: float, lon: float) -> np.ndarray:
        r = np.sqrt((1.0 - h) / h)
        return sphere.inverse_projection(np.array([r * np.cos(lon), r * np.sin(lon)]), pole)

    u = on_sphere(lat_u, lon_u)
    v = on_sphere(lat_v, lon_v)
    if cfg.input_path is not None:
        f = serialization.frame_function_from_json(_load_json(cfg.input_path))
    else:
        from .hilbert import DensityMatrix

        f = frame.FrameFunction.born(DensityMatrix.pure(UnitVector(pole, Field.REAL)))
    chain = sphere.build_piron_chain(u, v, pole, max_len)
    try:
        report = sphere.verify_monotonicity(f, chain)
        values = list(report.values)
        ok = True
    except MonotonicityViolation as exc:
        values = list(exc.values)
        ok = False
    rows = [
        [step, f"{w[0]:.17g}", f"{w[1]:.17g}", f"{w[2]:.17g}", f"{h:.17g}", f"{fv:.17g}"]
        for step, (w, h, fv) in enumerate(zip(chain.vectors, chain.latitudes(), values))
    ]
    _emit_csv(rows, ["step", "x", "y", "z", "h", "f"], cfg.output_path)
    return EXIT_PASS if ok else EXIT_VERDICT


def _cmd_magic_check(cfg: RunConfig) -> int:
    candidate = serialization.candidate_from_json(_load_json(cfg.input_path))
    try:
        report = scalar.verify_identity(candidate)
    except HypothesesNotMet as exc:
        _emit_json(exc.report.to_json(), cfg.output_path)
        return EXIT_VERDICT
    _emit_json(report.to_json(), cfg.output_path)
    return EXIT_PASS if report.verdict == "IDENTITY" else EXIT_VERDICT


def _freq_rows(table: np.ndarray) -> list[list]:
    return [[i] + [f"{x:.17g}" for x in row] for i, row in enumerate(np.atleast_2d(table))]


def _cmd_csm_sim(cfg: RunConfig, experiment: str) -> int:
    sys_ = csm.QuantumSystem(cfg.dim, cfg.field)
    seed, trials = cfg.seed, cfg.trials
    if experiment == "theorem1":
        ca = random_basis(cfg.dim, cfg.field, child_rng(seed, 100), label="Ca")
        cb = random_basis(cfg.dim, cfg.field, child_rng(seed, 101), label="Cb")
        report = csm.verify_theorem1(sys_, ca, cb, trials, seed)
        payload = {"experiment": experiment, "report": report.to_json()}
        table = report.empirical
        passed = report.passed
    elif experiment == "theorem2-fig1":
        report = csm.verify_theorem2_fig1(sys_, seed, trials)
        payload = {"experiment": experiment, "report": report.to_json()}
        table = np.array([list(report.empirical)])
        passed = report.passed
    elif experiment == "roundtrip":
        ca = random_basis(cfg.dim, cfg.field, child_rng(seed, 100), label="Cu")
        cb = random_basis(cfg.dim, cfg.field, child_rng(seed, 101), label="Cv")
        report = csm.refinement_contradiction_demo(sys_, ca, cb, trials, seed)
        payload = {"experiment": experiment, "report": report.to_json()}
        table = np.array([[report.return_frequency]])
        passed = report.passed
    elif experiment == "classical":
        base = random_basis(cfg.dim, cfg.field, child_rng(seed, 100), label="C0")
        rng = child_rng(seed, 101)
        contexts = [base]
        for k in range(3):
            perm = rng.permutation(cfg.dim)
            if cfg.field is Field.COMPLEX:
                phases = np.exp(1j * rng.uniform(0, 2 * np.pi, cfg.dim))
            else:
                phases = rng.choice([-1.0, 1.0], cfg.dim)
            m = base.matrix[:, perm] * phases
            contexts.append(
                csm.OrthonormalBasis.from_matrix(m, cfg.field, label=f"C{k + 1}")
            )
        mods = [
            csm.modality(c, i) for c in contexts for i in range(cfg.dim)
        ]
        classes = csm.extravalence_partition(mods)
        all_perm = all(
            csm.classify_context_pair(a, b).kind == "PERMUTATION"
            for i, a in enumerate(contexts)
            for b in contexts[i + 1 :]
        )
        passed = all_perm and len(classes) == cfg.dim
        payload = {
            "experiment": experiment,
            "report": {
                "contexts": len(contexts),
                "modalities": len(mods),
                "extravalence_classes": len(classes),
                "all_pairs_permutation": all_perm,
                "passed": passed,
            },
        }
        table = np.array([[float(len(classes))]])
    else:
        raise GleasonCsmError(f"unknown experiment {experiment!r}")
    payload["dim"] = cfg.dim
    payload["field"] = cfg.field.value
    payload["trials"] = trials
    payload["seed"] = seed
    _emit_json(payload, cfg.output_path)
    if cfg.csv_path is not None:
        _emit_csv(_freq_rows(table), ["row"] + [f"p{j}" for j in range(table.shape[1])], cfg.csv_path)
    return EXIT_PASS if passed else EXIT_VERDICT


def _plan_from_json(data: dict) -> tuple[pipeline.PreMeasurementModality, list[pipeline.ChainStep]]:
    init = data["initial"]
    field = Field.from_tag(init.get("field", "C"))
    vec = UnitVector(serialization.vector_from_json(init["vector"], field), field)
    m0 = pipeline.PreMeasurementModality(
        vec.projector(),
        pipeline.ContextStateLabel(init.get("context_label", "C0"), 0, init.get("metadata", "")),
    )
    steps = []
    for step in data["steps"]:
        ctx = serialization.basis_from_json(step["context"])
        u = step.get("unitary")
        steps.append(
            pipeline.ChainStep(ctx, serialization.unitary_from_json(u) if u else None)
        )
    return m0, steps


def _cmd_measure_demo(cfg: RunConfig, runs: int) -> int:
    m0, steps = _plan_from_json(_load_json(cfg.input_path))
    record, final = pipeline.run_measurement_chain(m0, steps, child_rng(cfg.seed, 0))
    payload = {
        "record": record.to_json(),
        "runs": runs,
        "seed": cfg.seed,
        "final_context_state": final.context_state.to_json(),
    }
    if runs > 1:
        counts = pipeline.run_chain_ensemble(m0, steps, runs, cfg.seed)
        payload["step_frequencies"] = [
            {"step": t, "counts": c.tolist()} for t, c in enumerate(counts)
        ]
        if cfg.csv_path is not None:
            width = max(len(c) for c in counts)
            rows = [
                [t] + [f"{c[j] / runs:.17g}" if j < len(c) else "" for j in range(width)]
                for t, c in enumerate(counts)
            ]
            _emit_csv(rows, ["step"] + [f"p{j}" for j in range(width)], cfg.csv_path)
    _emit_json(payload, cfg.output_path)
    return EXIT_PASS


def _cmd_unitary_path(cfg: RunConfig, perm: list[int], steps: int, include_path: bool) -> int:
    path = unitary_path_to_permutation(perm, steps)
    mats = [u.matrix for u in path]
    eye = np.eye(len(perm))
    unit_dev = max(float(np.max(np.abs(m.conj().T @ m - eye))) for m in mats)
    endpoint_dev = float(np.max(np.abs(mats[-1] - np.array(
        [[1.0 if i == perm[j] else 0.0 for j in range(len(perm))] for i in range(len(perm))]
    ))))
    max_imag = max(float(np.max(np.abs(m.imag))) for m in mats[1:-1]) if steps > 2 else 0.0
    step_norms = [
        float(np.linalg.norm(mats[k + 1] - mats[k], 2)) for k in range(len(mats) - 1)
    ]
    payload = {
        "perm": list(perm),
        "steps": steps,
        "max_unitarity_deviation": unit_dev,
        "endpoint_deviation": endpoint_dev,
        "endpoint_det": _det_pair(mats[-1]),
        "max_intermediate_imag": max_imag,
        "max_step_operator_norm": max(step_norms),
        "step_bound": 2 * np.pi / steps,
    }
    if include_path:
        payload["path"] = [
            serialization.matrix_to_json(m, Field.COMPLEX) for m in mats
        ]
    passed = unit_dev <= DEFAULT.derived and endpoint_dev <= 1e-8
    payload["passed"] = passed
    _emit_json(payload, cfg.output_path)
    return EXIT_PASS if passed else EXIT_VERDICT


def _det_pair(m: np.ndarray) -> list[float]:
    d = complex(np.linalg.det(m))
    return [d.real, d.imag]


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gleason-csm",
        description="Frame-function, descent-geometry and contextual measurement experiments.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p: argparse.ArgumentParser, seeded: bool = True, with_input: bool = False):
        if seeded:
            p.add_argument("--seed", type=int, required=True, help="64-bit unsigned seed")
        if with_input:
            p.add_argument("--input", type=Path, required=True)
        p.add_argument("--output", type=Path, default=None, help="write JSON/CSV here (default stdout)")

    p = sub.add_parser("gleason-fit", help="reconstruct the density matrix behind a frame function")
    add_common(p, with_input=True)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--tolerance", type=float, default=None, help="override the residual threshold")

    p = sub.add_parser("frame-check", help="check the basis-sum condition")
    add_common(p, with_input=True)
    p.add_argument("--bases", type=int, default=1000)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--use-stored-bases", action="store_true")

    p = sub.add_parser("piron-demo", help="emit a descent chain as CSV (step,x,y,z,h,f)")
    add_common(p, seeded=False)
    p.add_argument("--input", type=Path, default=None, help="optional frame-function fixture")
    p.add_argument("--latitude-u", type=float, default=0.8)
    p.add_argument("--latitude-v", type=float, default=0.3)
    p.add_argument("--longitude-u", type=float, default=0.0)
    p.add_argument("--longitude-v", type=float, default=1.0)
    p.add_argument("--max-len", type=int, default=200)

    p = sub.add_parser("magic-check", help="scalar identity lemma verdict for a candidate")
    add_common(p, seeded=False, with_input=True)

    p = sub.add_parser("csm-sim", help="contextual measurement experiments")
    add_common(p)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--field", choices=["R", "C"], default="C")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument(
        "--experiment",
        choices=["theorem1", "theorem2-fig1", "roundtrip", "classical"],
        required=True,
    )
    p.add_argument("--csv", type=Path, default=None, help="also write empirical tables as CSV")

    p = sub.add_parser("measure-demo", help="run a measurement chain plan")
    add_common(p, with_input=True)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--csv", type=Path, default=None)

    p = sub.add_parser("unitary-path", help="continuous unitary path from identity to a permutation")
    add_common(p, seeded=False)
    p.add_argument("--perm", type=str, required=True, help="comma-separated permutation, e.g. 1,0,2")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--include-path", action="store_true")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_USAGE
    cfg = RunConfig(
        subcommand=args.subcommand,
        dim=getattr(args, "dim", None),
        field=Field.from_tag(getattr(args, "field", "C")),
        trials=getattr(args, "trials", 100_000),
        seed=getattr(args, "seed", None),
        input_path=getattr(args, "input", None),
        output_path=getattr(args, "output", None),
        csv_path=getattr(args, "csv", None),
        tolerance=getattr(args, "tolerance", None),
    )
    if getattr(args, "trials", 1) < 1 or getattr(args, "runs", 1) < 1:
        print("error: trials/runs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.subcommand == "gleason-fit":
            return _cmd_gleason_fit(cfg, args.samples)
        if args.subcommand == "frame-check":
            return _cmd_frame_check(cfg, args.bases, args.use_stored_bases)
        if args.subcommand == "piron-demo":
            return _cmd_piron_demo(
                cfg, args.latitude_u, args.latitude_v, args.longitude_u, args.longitude_v, args.max_len
            )
        if args.subcommand == "magic-check":
            return _cmd_magic_check(cfg)
        if args.subcommand == "csm-sim":
            return _cmd_csm_sim(cfg, args.experiment)
        if args.subcommand == "measure-demo":
            return _cmd_measure_demo(cfg, args.runs)
        if args.subcommand == "unitary-path":
            perm = [int(x) for x in args.perm.split(",")]
            return _cmd_unitary_path(cfg, perm, args.steps, args.include_path)
        print(f"error: unknown subcommand {args.subcommand}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GleasonCsmError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry_point() -> None:
    sys.exit(main())
