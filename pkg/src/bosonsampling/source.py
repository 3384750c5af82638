"""Imperfect photon sources and click detectors.

Photons carry Gaussian temporal wavepackets, psi(t) ~ exp(-(t - tau)^2 / (2 sigma^2)),
so two photons delayed by dtau overlap by exp(-dtau^2 / (4 sigma^2)), capped by a
scalar spectral purity p. Downconversion sources emit k pairs with weight eta^(2k);
every photon beyond the first pair is treated as fully distinguishable from all
others, which lets its output distribution be convolved in independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import ModeConfiguration, as_config, as_matrix, enumerate_output_configurations
from .errors import DimensionError, NumericalDomainError, SchemaError
from .scattering import GramMatrix, OutcomeTable, ProbabilityRecord, p_classical, p_partial, p_quantum

# Delay used for "distinguishable" settings, in units of sigma_tau. exp(-(1e3)^2/4) underflows to 0.
FAR_DELAY = 1e3


@dataclass(frozen=True)
class SourceModel:
    """Downconversion source parameters.

    ``sources`` lists, per pair source, the nominal photon indices its arms feed
    (photons numbered in ascending input-mode order). A source feeding one photon
    is heralded: its twin goes to a trigger detector. When omitted, photons are
    paired in order and an odd photon out is heralded.
    """

    eta: float = 0.0
    purity: float = 1.0
    sigma_tau: float = 1.0
    delays: tuple[float, ...] = ()
    max_pairs_per_source: int = 2
    sources: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if not 0 <= self.eta < 0.5:
            raise SchemaError(f"eta must lie in [0, 0.5), got {self.eta}")
        if not 0 <= self.purity <= 1:
            raise SchemaError(f"purity must lie in [0, 1], got {self.purity}")
        if self.max_pairs_per_source < 1:
            raise SchemaError("max_pairs_per_source must be >= 1")
        object.__setattr__(self, "delays", tuple(float(d) for d in self.delays))
        if self.sources is not None:
            object.__setattr__(self, "sources", tuple(tuple(int(k) for k in s) for s in self.sources))

    def with_delays(self, delays: Sequence[float]) -> "SourceModel":
        return replace(self, delays=tuple(delays))

    def layout(self, n: int) -> tuple[tuple[int, ...], ...]:
        if self.sources is not None:
            flat = sorted(k for s in self.sources for k in s)
            if flat != list(range(n)) or any(len(s) not in (1, 2) for s in self.sources):
                raise SchemaError(f"source layout {self.sources} must cover photons 0..{n - 1} once, 1 or 2 per source")
            return self.sources
        return tuple(tuple(range(k, min(k + 2, n))) for k in range(0, n, 2))

    def to_json(self) -> dict:
        return {
            "eta": self.eta,
            "purity": self.purity,
            "sigma_tau": self.sigma_tau,
            "delays": list(self.delays),
            "max_pairs_per_source": self.max_pairs_per_source,
            "sources": None if self.sources is None else [list(s) for s in self.sources],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SourceModel":
        known = {"eta", "purity", "sigma_tau", "delays", "max_pairs_per_source", "sources"}
        unknown = set(data) - known
        if unknown:
            raise SchemaError(f"unknown source model fields {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise SchemaError(f"bad source model: {exc}") from exc


@dataclass(frozen=True)
class DetectionModel:
    """Bucket detectors with per-mode efficiency; ``tapped_modes`` carry a splitter and a second detector."""

    efficiencies: tuple[float, ...] | None = None
    splitter_ratio: float = 0.5
    tap_efficiency: float = 1.0
    tapped_modes: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 < self.splitter_ratio < 1:
            raise SchemaError(f"splitter_ratio must lie in (0, 1), got {self.splitter_ratio}")
        if not 0 < self.tap_efficiency <= 1:
            raise SchemaError(f"tap_efficiency must lie in (0, 1], got {self.tap_efficiency}")
        if self.efficiencies is not None:
            effs = tuple(float(e) for e in self.efficiencies)
            if any(not 0 < e <= 1 for e in effs):
                raise SchemaError(f"efficiencies must lie in (0, 1], got {effs}")
            object.__setattr__(self, "efficiencies", effs)
        object.__setattr__(self, "tapped_modes", tuple(int(k) for k in self.tapped_modes))

    def efficiency(self, mode: int) -> float:
        return 1.0 if self.efficiencies is None else self.efficiencies[mode]

    def to_json(self) -> dict:
        return {
            "efficiencies": None if self.efficiencies is None else list(self.efficiencies),
            "splitter_ratio": self.splitter_ratio,
            "tap_efficiency": self.tap_efficiency,
            "tapped_modes": list(self.tapped_modes),
        }

    @classmethod
    def from_json(cls, data: dict) -> "DetectionModel":
        try:
            return cls(**data)
        except TypeError as exc:
            raise SchemaError(f"bad detection model: {exc}") from exc


def gram_from_delays(model: SourceModel, n: int) -> GramMatrix:
    """S_kl = purity * exp(-(tau_k - tau_l)^2 / (4 sigma_tau^2)) off the diagonal, 1 on it."""
    if model.sigma_tau <= 0:
        raise NumericalDomainError(f"sigma_tau must be positive, got {model.sigma_tau}")
    delays = np.array(model.delays if model.delays else (0.0,) * n, dtype=float)
    if delays.size != n:
        raise DimensionError(f"source model has {delays.size} delays, need {n}")
    same = delays[:, None] == delays[None, :]
    with np.errstate(invalid="ignore"):
        diff = np.where(same, 0.0, delays[:, None] - delays[None, :])
    g = model.purity * np.exp(-(diff**2) / (4 * model.sigma_tau**2))
    np.fill_diagonal(g, 1.0)
    return GramMatrix(g)


def distinguishable_settings(n: int, sigma_tau: float) -> list[tuple[float, ...]]:
    """Delay settings used as the distinguishable reference.

    Photon k sits at (k - centre) * FAR_DELAY * sigma_tau, plus the mirrored
    setting; for three photons that is {-d, 0, d} and {d, 0, -d}. Two photons use
    the single setting {0, d}.
    """
    d = FAR_DELAY * sigma_tau
    if n <= 1:
        return [(0.0,) * n]
    if n == 2:
        return [(0.0, d)]
    centre = (n - 1) / 2
    forward = tuple((k - centre) * d for k in range(n))
    return [forward, tuple(-t for t in forward)]


@dataclass(frozen=True)
class HomPoint:
    delay: float
    probability: float
    visibility: float


def hom_scan(U, S, T, model: SourceModel, delay_grid: Sequence[float]) -> list[HomPoint]:
    """Two-photon coincidence probability as the relative delay is scanned.

    P(dtau) = p_C * (1 - V * purity^2 * exp(-dtau^2 / (2 sigma^2))), where V is the ideal
    visibility; ``visibility`` at each point is (p_C - P(dtau)) / p_C.
    """
    S, T = as_config(S), as_config(T)
    if S.n != 2:
        raise DimensionError(f"delay scans need exactly two photons, got {S.n}")
    pc = p_classical(U, S, T)
    points = []
    for tau in delay_grid:
        gram = gram_from_delays(model.with_delays((0.0, float(tau))), 2)
        p = p_partial(U, S, T, gram)
        vis = (pc - p) / pc if pc > 0 else float("nan")
        points.append(HomPoint(float(tau), p, vis))
    return points


@dataclass(frozen=True)
class EnsembleEntry:
    config: ModeConfiguration
    weight: float
    # Input modes of photons in excess of the nominal ones; these are fully distinguishable.
    excess_modes: tuple[int, ...] = ()

    @property
    def tags(self) -> tuple[str, ...]:
        """Per-photon tag in ascending mode order, nominal photons first within a mode."""
        out = []
        for mode, occ in enumerate(self.config.occupations):
            extra = self.excess_modes.count(mode)
            out += ["nominal"] * (occ - extra) + ["excess"] * extra
        return tuple(out)


def pair_weights(eta: float, cap: int) -> list[float]:
    """Probability of k = 1..cap pairs given at least one, proportional to eta^(2k)."""
    raw = [eta ** (2 * (k - 1)) for k in range(1, cap + 1)]
    total = math.fsum(raw)
    return [w / total for w in raw]


def spdc_input_ensemble(model: SourceModel, nominal_S) -> list[EnsembleEntry]:
    """Actual input configurations and their weights given multi-pair emission.

    Every source is conditioned on emitting at least one pair (coincidence
    post-selection for unheralded sources, a trigger click for heralded ones).
    A source emitting k pairs puts k photons into each circuit mode it feeds.
    """
    S = as_config(nominal_S)
    if not S.collision_free:
        raise SchemaError(f"nominal input must be collision-free, got {S}")
    photon_modes = S.modes()
    layout = model.layout(S.n)
    weights = pair_weights(model.eta, model.max_pairs_per_source)
    entries = [EnsembleEntry(S, 1.0)]
    for source in layout:
        grown = []
        for entry in entries:
            for k, w in enumerate(weights, start=1):
                if w == 0.0:
                    continue
                extra = tuple(photon_modes[p] for p in source for _ in range(k - 1))
                occ = list(entry.config.occupations)
                for mode in extra:
                    occ[mode] += 1
                grown.append(EnsembleEntry(ModeConfiguration(tuple(occ)), entry.weight * w,
                                           tuple(sorted(entry.excess_modes + extra))))
        entries = grown
    return entries


def _nominal_distribution(a: np.ndarray, S: ModeConfiguration, gram: GramMatrix) -> dict[tuple[int, ...], float]:
    return {T.occupations: p_partial(a, S, T, gram) for T in enumerate_output_configurations(S.m, S.n)}


def _add_distinguishable_photon(dist: dict, row_probs: np.ndarray) -> dict:
    out: dict[tuple[int, ...], float] = {}
    for occ, p in dist.items():
        for j, q in enumerate(row_probs):
            if q == 0.0:
                continue
            new = list(occ)
            new[j] += 1
            key = tuple(new)
            out[key] = out.get(key, 0.0) + p * q
    return out


def _detect_probability(arrived: int, required: int, mode: int, detection: DetectionModel) -> float:
    """Probability that detectors on ``mode`` certify ``required`` photons given ``arrived`` photons."""
    e = detection.efficiency(mode)
    if required == 1:
        return 1.0 - (1.0 - e) ** arrived
    if mode in detection.tapped_modes:
        if required > 2:
            # Two detectors behind one tap cannot certify more than two photons.
            return 0.0
        r, e_tap = detection.splitter_ratio, detection.tap_efficiency
        return (1.0 - (1.0 - e * r) ** arrived - (1.0 - e_tap * (1.0 - r)) ** arrived
                + (1.0 - e * r - e_tap * (1.0 - r)) ** arrived)
    # Untapped mode treated as an ideal number-resolving detector with binomial loss.
    return float(sum(math.comb(arrived, k) * e**k * (1 - e) ** (arrived - k) for k in range(required, arrived + 1)))


def _accept_probability(dist: dict, T: ModeConfiguration, detection: DetectionModel) -> float:
    monitored = [(j, t) for j, t in enumerate(T.occupations) if t > 0]
    total = 0.0
    for occ, p in dist.items():
        if any(occ[j] < t for j, t in monitored):
            continue
        weight = p
        for j, t in monitored:
            weight *= _detect_probability(occ[j], t, j, detection)
        total += weight
    return total


def model_probabilities(U, nominal_S, model: SourceModel, detection: DetectionModel | None = None,
                        targets: Sequence[ModeConfiguration] | None = None,
                        delays: Sequence[float] | None = None) -> list[float]:
    """Detection probability of each target output under the source/detector model.

    Each ensemble entry contributes its weight times the probability that every
    monitored detector (the support of the target) registers; photons leaving
    through unmonitored modes are ignored.
    """
    a = as_matrix(U)
    S = as_config(nominal_S)
    detection = detection or DetectionModel()
    if targets is None:
        targets = enumerate_output_configurations(S.m, S.n, collision_free_only=True)
    targets = [as_config(T) for T in targets]
    if delays is not None:
        model = model.with_delays(delays)
    gram = gram_from_delays(model, S.n)
    nominal = _nominal_distribution(a, S, gram)
    single = np.abs(a) ** 2
    result = np.zeros(len(targets))
    for entry in spdc_input_ensemble(model, S):
        dist = nominal
        for mode in entry.excess_modes:
            dist = _add_distinguishable_photon(dist, single[mode])
        result += entry.weight * np.array([_accept_probability(dist, T, detection) for T in targets])
    return result.tolist()


def predict_measured_table(U, nominal_S, model: SourceModel, detection: DetectionModel | None = None,
                           collision_free_only: bool = True, delays: Sequence[float] | None = None) -> OutcomeTable:
    """Ideal quantum and classical probabilities alongside the modelled detection probability."""
    a = as_matrix(U)
    S = as_config(nominal_S)
    targets = enumerate_output_configurations(S.m, S.n, collision_free_only)
    p_model = model_probabilities(a, S, model, detection, targets, delays)
    records = [ProbabilityRecord(T, p_quantum(a, S, T), p_classical(a, S, T), pm) for T, pm in zip(targets, p_model)]
    return OutcomeTable(source=S, records=records, flavor="model")


def number_resolved_probability(two_photon_mode_prob: float, detection: DetectionModel | None = None,
                                mode: int | None = None) -> float:
    """Rate at which a two-photon event in a tapped mode is registered as a coincidence.

    Both photons must leave through different splitter ports (2 r (1 - r)) and both
    detectors must fire.
    """
    detection = detection or DetectionModel()
    r = detection.splitter_ratio
    e = detection.efficiency(mode) if mode is not None else 1.0
    return two_photon_mode_prob * 2 * r * (1 - r) * e * detection.tap_efficiency


__all__ = [
    "DetectionModel",
    "EnsembleEntry",
    "HomPoint",
    "SourceModel",
    "distinguishable_settings",
    "gram_from_delays",
    "hom_scan",
    "model_probabilities",
    "number_resolved_probability",
    "pair_weights",
    "predict_measured_table",
    "spdc_input_ensemble",
]
