"""Interference visibilities and prediction-versus-measurement comparison."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .coherent import CoherentInput, coherent_p0, coherent_pinf
from .core import ModeConfiguration, as_config, as_matrix, enumerate_output_configurations
from .errors import DimensionError, NumericalDomainError, SchemaError
from .scattering import p_classical, p_quantum
from .source import DetectionModel, SourceModel, distinguishable_settings, model_probabilities

# Reference probabilities at or below this are treated as unreachable.
UNREACHABLE_FLOOR = 1e-15

SOURCES = ("fock_prediction", "coherent_prediction", "model_prediction", "sampled")


def visibility(p_c: float, p_q: float) -> float:
    """(p_C - p_Q) / p_C."""
    if p_c <= 0:
        raise NumericalDomainError("visibility undefined when the classical probability is zero")
    return (p_c - p_q) / p_c


@dataclass
class VisibilityRecord:
    config: ModeConfiguration
    value: float | None
    source: str
    flags: tuple[str, ...] = ()

    @property
    def usable(self) -> bool:
        return self.value is not None and not self.flags

    def to_json(self) -> dict:
        return {"T": list(self.config.occupations), "V": self.value, "source": self.source, "flags": list(self.flags)}

    @classmethod
    def from_json(cls, data: dict) -> "VisibilityRecord":
        try:
            value = data["V"]
            return cls(ModeConfiguration(tuple(data["T"])), None if value is None else float(value),
                       str(data["source"]), tuple(data.get("flags", ())))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad visibility record: {exc}") from exc


def _record(T, reference: float, interfering: float, source: str) -> VisibilityRecord:
    if reference <= UNREACHABLE_FLOOR:
        return VisibilityRecord(T, None, source, ("unreachable",))
    return VisibilityRecord(T, (reference - interfering) / reference, source)


def model_visibilities(U, S, model: SourceModel, detection: DetectionModel | None = None,
                       targets: Sequence[ModeConfiguration] | None = None) -> list[VisibilityRecord]:
    """Visibilities a lab with the modelled source and detectors would measure.

    The interfering rate uses the model's own delays; the reference averages
    the far-delay settings (for three photons, {-d, 0, d} and {d, 0, -d}).
    """
    S = as_config(S)
    if targets is None:
        targets = enumerate_output_configurations(S.m, S.n, collision_free_only=True)
    interfering = model_probabilities(U, S, model, detection, targets)
    settings = distinguishable_settings(S.n, model.sigma_tau)
    reference = np.mean([model_probabilities(U, S, model, detection, targets, delays=d) for d in settings], axis=0)
    return [_record(T, float(rc), float(rq), "model_prediction") for T, rc, rq in zip(targets, reference, interfering)]


def visibility_table(U, S, method: str | SourceModel = "fock", detection: DetectionModel | None = None,
                     collision_free_only: bool = True) -> list[VisibilityRecord]:
    """One visibility per output configuration, in enumeration order.

    ``method`` is ``"fock"`` (ideal single photons), ``"coherent"`` (phase-averaged
    coherent states on the same input modes) or a ``SourceModel``.
    """
    a = as_matrix(U)
    S = as_config(S)
    if S.m != a.shape[0]:
        raise DimensionError(f"input has {S.m} modes but the matrix has {a.shape[0]}")
    targets = enumerate_output_configurations(S.m, S.n, collision_free_only)
    if isinstance(method, SourceModel):
        return model_visibilities(a, S, method, detection, targets)
    if method == "fock":
        # Ideal photons at far delays are exactly distinguishable, so every delay setting gives p_classical.
        return [_record(T, p_classical(a, S, T), p_quantum(a, S, T), "fock_prediction") for T in targets]
    if method == "coherent":
        inputs = CoherentInput.from_config(S)
        return [_record(T, coherent_pinf(a, inputs, T), coherent_p0(a, inputs, T), "coherent_prediction")
                for T in targets]
    raise SchemaError(f"unknown visibility method {method!r}")


@dataclass
class ComparisonReport:
    deltas: list[float | None]
    l1: float
    count: int
    excluded: int = 0
    configs: list[ModeConfiguration] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "L1": self.l1,
            "count": self.count,
            "excluded": self.excluded,
            "per_config": [{"T": list(c.occupations), "absdiff": d} for c, d in zip(self.configs, self.deltas)],
        }


def l1_distance(A: Sequence[VisibilityRecord], B: Sequence[VisibilityRecord]) -> ComparisonReport:
    """Mean |V_A - V_B| over configurations usable in both tables."""
    configs_a = [r.config for r in A]
    if configs_a != [r.config for r in B]:
        raise DimensionError("visibility tables cover different configurations")
    deltas: list[float | None] = []
    used = []
    for ra, rb in zip(A, B):
        if ra.usable and rb.usable:
            d = abs(ra.value - rb.value)
            deltas.append(d)
            used.append(d)
        else:
            deltas.append(None)
    if not used:
        raise NumericalDomainError("no configuration is usable in both tables")
    return ComparisonReport(deltas, math.fsum(used) / len(used), len(used), len(deltas) - len(used), configs_a)


@dataclass
class CountTable:
    """Event counts per output configuration, collected over ``exposure`` trials (or seconds)."""

    counts: dict[ModeConfiguration, int]
    exposure: float = 1.0

    def __post_init__(self):
        if self.exposure <= 0:
            raise SchemaError(f"exposure must be positive, got {self.exposure}")
        self.counts = {as_config(k): int(v) for k, v in self.counts.items()}
        if any(v < 0 for v in self.counts.values()):
            raise SchemaError("counts must be non-negative")

    def rate(self, config: ModeConfiguration) -> float:
        return self.counts[config] / self.exposure

    def to_json(self) -> dict:
        return {"exposure": self.exposure,
                "counts": [{"T": list(c.occupations), "count": n} for c, n in self.counts.items()]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["T", "count"])
        for c, n in self.counts.items():
            writer.writerow([" ".join(map(str, c.occupations)), n])
        return buf.getvalue()

    @classmethod
    def from_json(cls, data: dict) -> "CountTable":
        try:
            counts = {ModeConfiguration(tuple(row["T"])): int(row["count"]) for row in data["counts"]}
            return cls(counts, float(data.get("exposure", 1.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad count table: {exc}") from exc


def visibilities_from_counts(indistinguishable: CountTable, distinguishable: CountTable) -> list[VisibilityRecord]:
    """V_T = 1 - rate_Q / rate_C per configuration.

    Rates are counts over each table's exposure, so any per-configuration
    detection efficiency multiplies both rates and cancels.
    """
    if list(indistinguishable.counts) != list(distinguishable.counts):
        raise DimensionError("count tables cover different configurations")
    records = []
    for config in indistinguishable.counts:
        rc = distinguishable.rate(config)
        if distinguishable.counts[config] == 0:
            records.append(VisibilityRecord(config, None, "sampled", ("insufficient-statistics",)))
            continue
        records.append(VisibilityRecord(config, 1.0 - indistinguishable.rate(config) / rc, "sampled"))
    return records


def visibilities_to_csv(records: Sequence[VisibilityRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["T", "V", "source", "flags"])
    for r in records:
        writer.writerow([" ".join(map(str, r.config.occupations)), "" if r.value is None else repr(r.value),
                         r.source, ";".join(r.flags)])
    return buf.getvalue()


@dataclass(frozen=True)
class SweepRow:
    eta: float
    purity: float
    l1_fock: float
    l1_coherent: float


def spdc_sweep(U, S, etas: Sequence[float], purities: Sequence[float], sigma_tau: float = 1.0,
               detection: DetectionModel | None = None) -> list[SweepRow]:
    """L1 distance of modelled visibilities from the ideal Fock and coherent predictions over (eta, purity)."""
    fock = visibility_table(U, S, "fock")
    coherent = visibility_table(U, S, "coherent")
    rows = []
    for eta in etas:
        for purity in purities:
            model = SourceModel(eta=eta, purity=purity, sigma_tau=sigma_tau)
            predicted = visibility_table(U, S, model, detection)
            rows.append(SweepRow(eta, purity, l1_distance(predicted, fock).l1, l1_distance(predicted, coherent).l1))
    return rows


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["eta", "purity", "L1_fock", "L1_coherent"])
    for r in rows:
        writer.writerow([repr(r.eta), repr(r.purity), repr(r.l1_fock), repr(r.l1_coherent)])
    return buf.getvalue()
