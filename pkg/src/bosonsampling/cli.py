"""Command-line entry point.

Every command that writes files also writes ``<out>.manifest.json`` recording the
normalised arguments, input and output checksums, and the tool version. ``replay``
re-executes a manifest into a scratch directory and checks the outputs byte for byte.

Exit codes: 0 success, 2 schema/validation error, 3 dimension or photon-number
mismatch, 4 numerical-domain error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from typing import Callable

import numpy as np

from . import __version__
from .analysis import (
    CountTable,
    VisibilityRecord,
    l1_distance,
    spdc_sweep,
    sweep_to_csv,
    visibilities_to_csv,
    visibility_table,
)
from .characterize import ProbeReading, gauge_align, reconstruct, simulate_probes
from .coherent import CoherentInput, coherent_p0
from .core import ModeConfiguration, TransferMatrix, random_unitary, validate
from .errors import BosonSamplingError, DimensionError, SchemaError
from .permanent import ALGORITHMS, evaluate
from .scattering import full_distribution, sample
from .source import DetectionModel, SourceModel, gram_from_delays, hom_scan, predict_measured_table

# Arguments holding input file paths; recorded as absolute paths with checksums.
INPUT_ARGS = ("device", "truth", "probes", "unitary", "model", "detection", "a", "b", "matrix")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise SchemaError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None


def _load_matrix(path: str) -> TransferMatrix:
    data = _read_json(path)
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: expected a transfer matrix object")
    matrix = TransferMatrix.from_json(data)
    if validate(matrix).status == "invalid":
        raise SchemaError(f"{path}: matrix is invalid (non-finite or grossly non-unitary)")
    return matrix


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise SchemaError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise SchemaError(f"expected comma-separated numbers, got {text!r}") from None


def _config(modes: str | None, occ: str | None, m: int, what: str) -> ModeConfiguration:
    """Parse a 1-based mode list (``1,3,5``) or an occupation vector (``1,0,1,0,1,0``)."""
    if (modes is None) == (occ is None):
        raise SchemaError(f"give exactly one of --{what} and --{what}-occ")
    if occ is not None:
        config = ModeConfiguration(tuple(_int_list(occ)))
        if config.m != m:
            raise DimensionError(f"--{what}-occ has {config.m} entries, matrix has {m} modes")
        return config
    return ModeConfiguration.from_modes([k - 1 for k in _int_list(modes)], m)


def _grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise SchemaError(f"grid must be start:stop:num, got {text!r}")
    try:
        return np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError:
        raise SchemaError(f"bad grid {text!r}") from None


def _stem(out: str) -> str:
    base, ext = os.path.splitext(out)
    return base if ext else out


# ---------------------------------------------------------------- commands
# Each command returns {output path: text}; writing and manifests are handled in main().


def cmd_gen_unitary(args) -> dict[str, str]:
    matrix = random_unitary(args.modes, args.seed)
    report = validate(matrix)
    print(f"m={matrix.m} deviation={report.deviation:.3e} status={report.status}")
    return {args.out: _dumps(matrix.to_json())}


def cmd_characterize(args) -> dict[str, str]:
    outputs = {}
    device = None
    if args.probes:
        rows = _read_json(args.probes)
        probes = [ProbeReading.from_json(r) for r in rows]
        m = probes[0].intensities.size if probes else 0
    else:
        if not args.device:
            raise SchemaError("give --device to simulate probes or --probes to replay them")
        device = _load_matrix(args.device)
        probes = simulate_probes(device, args.noise, args.seed)
        m = device.m
        outputs[_stem(args.out) + ".probes.json"] = _dumps([p.to_json() for p in probes])
    report = reconstruct(probes, m)
    truth = _load_matrix(args.truth) if args.truth else device
    if truth is not None:
        if truth.m != m:
            raise DimensionError(f"truth has {truth.m} modes, probes describe {m}")
        _, report.residual = gauge_align(truth, report.reconstructed)
    print(f"reconstructed m={m} residual={report.residual}")
    outputs[args.out] = _dumps(report.to_json())
    return outputs


def cmd_predict(args) -> dict[str, str]:
    U = _load_matrix(args.unitary)
    S = _config(args.input, args.input_occ, U.m, "input")
    cf = not args.collisions
    if args.flavor in ("fock", "classical"):
        table = full_distribution(U, S, "quantum" if args.flavor == "fock" else "classical",
                                  collision_free_only=cf)
        vis = visibility_table(U, S, "fock", collision_free_only=cf)
    elif args.flavor == "coherent":
        table = full_distribution(U, S, "quantum", collision_free_only=cf)
        inputs = CoherentInput.from_config(S)
        for r in table.records:
            r.p_model = coherent_p0(U, inputs, r.config)
        table.flavor = "model"
        vis = visibility_table(U, S, "coherent", collision_free_only=cf)
    else:
        model = SourceModel.from_json(_read_json(args.model)) if args.model else SourceModel()
        detection = DetectionModel.from_json(_read_json(args.detection)) if args.detection else None
        table = predict_measured_table(U, S, model, detection, collision_free_only=cf)
        vis = visibility_table(U, S, model, detection, collision_free_only=cf)
    for w in table.warnings:
        print(f"warning: {w}", file=sys.stderr)
    stem = _stem(args.out)
    shown = [r for r in vis if r.value is not None]
    print(f"{len(table.records)} configurations, {len(shown)} with defined visibility")
    return {
        args.out: _dumps(table.to_json()),
        stem + ".csv": table.to_csv(),
        stem + ".visibilities.json": _dumps([r.to_json() for r in vis]),
        stem + ".visibilities.csv": visibilities_to_csv(vis),
    }


def cmd_sample(args) -> dict[str, str]:
    U = _load_matrix(args.unitary)
    S = _config(args.input, args.input_occ, U.m, "input")
    if args.delays:
        model = SourceModel(purity=args.purity, sigma_tau=args.sigma, delays=tuple(_float_list(args.delays)))
        draws = sample(U, S, "partial", args.shots, args.seed, gram=gram_from_delays(model, S.n))
    else:
        draws = sample(U, S, "quantum", args.shots, args.seed)
    configs = full_distribution(U, S, "quantum").configs
    counts = {c: 0 for c in configs}
    for d in draws:
        counts[d] += 1
    table = CountTable(counts, exposure=float(args.shots))
    print(f"{args.shots} shots over {sum(1 for v in counts.values() if v)} distinct outputs")
    return {args.out: _dumps(table.to_json()), _stem(args.out) + ".csv": table.to_csv()}


def cmd_hom_scan(args) -> dict[str, str]:
    U = _load_matrix(args.unitary)
    S = _config(args.input, args.input_occ, U.m, "input")
    T = _config(args.output, args.output_occ, U.m, "output")
    model = SourceModel(purity=args.purity, sigma_tau=args.sigma)
    points = hom_scan(U, S, T, model, _grid(args.grid))
    lines = ["delay,probability,visibility"]
    lines += [f"{p.delay!r},{p.probability!r},{p.visibility!r}" for p in points]
    return {args.out: "\n".join(lines) + "\n"}


def cmd_compare(args) -> dict[str, str]:
    a = [VisibilityRecord.from_json(r) for r in _read_json(args.a)]
    b = [VisibilityRecord.from_json(r) for r in _read_json(args.b)]
    report = l1_distance(a, b)
    print(f"L1={report.l1!r} over {report.count} configurations ({report.excluded} excluded)")
    return {args.out: _dumps(report.to_json())}


def cmd_spdc_sweep(args) -> dict[str, str]:
    U = _load_matrix(args.unitary)
    S = _config(args.input, args.input_occ, U.m, "input")
    detection = DetectionModel.from_json(_read_json(args.detection)) if args.detection else None
    rows = spdc_sweep(U, S, _float_list(args.eta_grid), _float_list(args.purity_grid), args.sigma, detection)
    return {args.out: sweep_to_csv(rows)}


def cmd_perm(args) -> dict[str, str]:
    data = _read_json(args.matrix)
    if isinstance(data, dict):
        a = TransferMatrix.from_json(data).entries
    else:
        a = np.asarray(data, dtype=complex)
    result = evaluate(a, args.algorithm)
    print(f"value={result.value!r} algorithm={result.algorithm} n={result.n} seconds={result.seconds:.6f}")
    return {args.out: _dumps(result.to_json())} if args.out else {}


# ---------------------------------------------------------------- plumbing


def _write_outputs(outputs: dict[str, str]) -> dict[str, str]:
    """Write every output atomically; on any failure no output file is left behind."""
    staged = []
    try:
        for path, text in outputs.items():
            directory = os.path.dirname(os.path.abspath(path))
            os.makedirs(directory, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, path))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, path in staged:
        os.replace(tmp, path)
    return {path: _sha256(text.encode("utf-8")) for path, text in outputs.items()}


def _normalised_argv(args, parser_argv: list[str]) -> list[str]:
    out = []
    it = iter(parser_argv)
    for token in it:
        out.append(token)
        key = token.lstrip("-").replace("-", "_")
        if token.startswith("--") and key in INPUT_ARGS + ("out",):
            value = next(it, None)
            if value is not None:
                out.append(os.path.abspath(value))
    return out


def _manifest(args, argv: list[str], checksums: dict[str, str]) -> dict:
    inputs = {}
    for name in INPUT_ARGS:
        path = getattr(args, name, None)
        if path:
            with open(path, "rb") as fh:
                inputs[os.path.abspath(path)] = _sha256(fh.read())
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",) and not callable(v)}
    return {
        "command": args.command,
        "argv": _normalised_argv(args, argv),
        "parameters": params,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "inputs": inputs,
        "outputs": {os.path.basename(p): h for p, h in checksums.items()},
    }


def cmd_replay(args) -> int:
    manifest = _read_json(args.manifest)
    try:
        argv = list(manifest["argv"])
        expected = dict(manifest["outputs"])
    except (KeyError, TypeError):
        raise SchemaError(f"{args.manifest}: not a run manifest") from None
    for path, digest in manifest.get("inputs", {}).items():
        if not os.path.exists(path):
            raise SchemaError(f"input {path} recorded in the manifest is missing")
        with open(path, "rb") as fh:
            if _sha256(fh.read()) != digest:
                print(f"warning: input {path} changed since the manifest was written", file=sys.stderr)
    with tempfile.TemporaryDirectory() as scratch:
        if "--out" in argv:
            i = argv.index("--out") + 1
            argv[i] = os.path.join(scratch, os.path.basename(argv[i]))
        parser = build_parser()
        sub = parser.parse_args(argv)
        outputs = sub.func(sub)
        got = {os.path.basename(p): _sha256(t.encode("utf-8")) for p, t in outputs.items()}
    mismatched = sorted(k for k in expected if got.get(k) != expected[k])
    for name in sorted(expected):
        print(f"{name}: {'MISMATCH' if name in mismatched else 'identical'}")
    return 1 if mismatched else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bosonsampling", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    def add_input(p, what="input"):
        p.add_argument(f"--{what}", help="1-based mode list, e.g. 1,3,5")
        p.add_argument(f"--{what}-occ", help="occupation vector, e.g. 1,0,1,0,1,0")

    p = add("gen-unitary", cmd_gen_unitary, "write a Haar-random transfer matrix")
    p.add_argument("--modes", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = add("characterize", cmd_characterize, "simulate coherent probes and reconstruct the matrix")
    p.add_argument("--device")
    p.add_argument("--probes", help="replay a saved probe set instead of simulating")
    p.add_argument("--truth", help="reference matrix for the residual (defaults to --device)")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = add("predict", cmd_predict, "outcome table and visibilities for one input")
    p.add_argument("--unitary", required=True)
    add_input(p)
    p.add_argument("--flavor", choices=("fock", "classical", "coherent", "model"), default="fock")
    p.add_argument("--model", help="SourceModel JSON (flavor=model)")
    p.add_argument("--detection", help="DetectionModel JSON (flavor=model)")
    p.add_argument("--collisions", action="store_true", help="include colliding outputs")
    p.add_argument("--out", required=True)

    p = add("sample", cmd_sample, "draw output samples from the exact distribution")
    p.add_argument("--unitary", required=True)
    add_input(p)
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--delays", help="per-photon delays (comma list, 'inf' allowed)")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--purity", type=float, default=1.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = add("hom-scan", cmd_hom_scan, "two-photon coincidence probability versus delay")
    p.add_argument("--unitary", required=True)
    add_input(p)
    add_input(p, "output")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--purity", type=float, default=1.0)
    p.add_argument("--grid", default="-5:5:101", help="start:stop:num")
    p.add_argument("--out", required=True)

    p = add("compare", cmd_compare, "L1 distance between two visibility tables")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out", required=True)

    p = add("spdc-sweep", cmd_spdc_sweep, "L1 distances of modelled visibilities over eta and purity")
    p.add_argument("--unitary", required=True)
    add_input(p)
    p.add_argument("--eta-grid", default="0.05,0.1,0.15,0.2")
    p.add_argument("--purity-grid", default="0.9,0.99")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--detection")
    p.add_argument("--out", required=True)

    p = add("perm", cmd_perm, "permanent of a matrix (benchmark hook)")
    p.add_argument("--matrix", required=True, help="transfer-matrix JSON or a nested list")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="ryser")
    p.add_argument("--out")

    p = add("replay", cmd_replay, "re-run a manifest and compare outputs byte for byte")
    p.add_argument("manifest")
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            return cmd_replay(args)
        outputs = args.func(args)
        if not outputs:
            return 0
        checksums = _write_outputs(outputs)
        _write_outputs({args.out + ".manifest.json": _dumps(_manifest(args, argv, checksums))})
    except BosonSamplingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
