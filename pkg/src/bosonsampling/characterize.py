"""Transfer-matrix reconstruction from classical coherent-light probes.

A device is probed with 2m - 1 input combinations:

* m single-mode probes (light into input i alone), whose output intensities give
  the moduli r_ij = sqrt(n_ij);
* m - 1 dual-mode probes (inputs 1 and k together, relative phase phi), each
  read at phi in {0, pi/2, pi, 3pi/2}. The fringe
  I(phi) = r_1j^2 + r_kj^2 + 2 r_1j r_kj cos(theta_kj - theta_1j + phi)
  gives the phase difference as atan2(I(3pi/2) - I(pi/2), I(0) - I(pi)).

Only phases relative to row 1 are observable. Input and output phase freedom is
fixed by making row 1 and column 1 real and non-negative.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import TransferMatrix, as_matrix
from .errors import DimensionError, SchemaError

DUAL_PHASES = (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi)
INDETERMINATE_FLOOR = 1e-8
GAUGE = "row0-col0-real-nonnegative"


@dataclass(frozen=True, eq=False)
class ProbeReading:
    """Output intensities for one probe setting.

    ``inputs`` is ``(i,)`` for a single-mode probe or ``(0, k)`` for a dual-mode
    probe; ``phase`` is the relative phase on input k (``None`` for single probes).
    """

    kind: str
    inputs: tuple[int, ...]
    intensities: np.ndarray
    phase: float | None = None

    def __post_init__(self):
        values = np.array(self.intensities, dtype=float)
        if values.ndim != 1:
            raise SchemaError("probe intensities must be a flat list")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise SchemaError(f"probe intensities must be finite and non-negative ({self.kind} {self.inputs})")
        values.setflags(write=False)
        object.__setattr__(self, "intensities", values)
        object.__setattr__(self, "inputs", tuple(int(i) for i in self.inputs))
        if self.kind == "single":
            if len(self.inputs) != 1 or self.phase is not None:
                raise SchemaError("single probe takes exactly one input and no phase")
        elif self.kind == "dual":
            if len(self.inputs) != 2 or self.inputs[0] != 0 or self.inputs[1] < 1:
                raise SchemaError(f"dual probe must pair input 0 with k >= 1, got {self.inputs}")
            if self.phase is None or _phase_slot(self.phase) is None:
                raise SchemaError(f"dual probe phase must be one of 0, pi/2, pi, 3pi/2, got {self.phase}")
        else:
            raise SchemaError(f"unknown probe kind {self.kind!r}")

    def to_json(self) -> dict:
        return {"kind": self.kind, "inputs": list(self.inputs), "phase": self.phase,
                "intensities": self.intensities.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "ProbeReading":
        try:
            return cls(kind=data["kind"], inputs=tuple(data["inputs"]), intensities=data["intensities"],
                       phase=data.get("phase"))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad probe reading: {exc}") from exc


def _phase_slot(phase: float) -> int | None:
    for slot, ref in enumerate(DUAL_PHASES):
        if abs(phase - ref) < 1e-9:
            return slot
    return None


def simulate_probes(device, noise_sigma: float = 0.0, seed: int | None = None) -> list[ProbeReading]:
    """Probe readings for a device, each intensity multiplied by (1 + eps), eps ~ N(0, noise_sigma)."""
    if noise_sigma < 0:
        raise SchemaError(f"noise_sigma must be non-negative, got {noise_sigma}")
    a = as_matrix(device)
    m = a.shape[0]
    rng = np.random.default_rng(seed)

    def noisy(values):
        if noise_sigma == 0:
            return values
        return np.clip(values * (1.0 + rng.normal(0.0, noise_sigma, size=values.shape)), 0.0, None)

    readings = [ProbeReading("single", (i,), noisy(np.abs(a[i]) ** 2)) for i in range(m)]
    for k in range(1, m):
        for phi in DUAL_PHASES:
            field_out = a[0] + np.exp(1j * phi) * a[k]
            readings.append(ProbeReading("dual", (0, k), noisy(np.abs(field_out) ** 2), phase=phi))
    return readings


def probe_configurations(probes: list[ProbeReading]) -> list[tuple[str, tuple[int, ...]]]:
    """Distinct input combinations used, ignoring the phase settings of dual probes."""
    seen = []
    for p in probes:
        key = (p.kind, p.inputs)
        if key not in seen:
            seen.append(key)
    return seen


@dataclass
class CharacterizationReport:
    reconstructed: TransferMatrix
    gauge: str = GAUGE
    residual: float | None = None
    indeterminate: list[tuple[int, int]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "reconstructed": self.reconstructed.to_json(),
            "gauge": self.gauge,
            "residual": self.residual,
            "phase_indeterminate": [list(p) for p in self.indeterminate],
        }


def reconstruct(probes: list[ProbeReading], m: int) -> CharacterizationReport:
    singles: dict[int, np.ndarray] = {}
    fringes: dict[int, dict[int, np.ndarray]] = {}
    for p in probes:
        if p.intensities.shape != (m,):
            raise DimensionError(f"probe {p.kind} {p.inputs} has {p.intensities.size} outputs, expected {m}")
        if p.kind == "single":
            singles[p.inputs[0]] = p.intensities
        else:
            fringes.setdefault(p.inputs[1], {})[_phase_slot(p.phase)] = p.intensities
    missing = [i for i in range(m) if i not in singles]
    missing += [("dual", k) for k in range(1, m) if len(fringes.get(k, {})) != len(DUAL_PHASES)]
    if missing:
        raise SchemaError(f"incomplete probe set, missing {missing}")

    moduli = np.sqrt(np.array([singles[i] for i in range(m)]))
    delta = np.zeros((m, m))
    determinate = np.ones((m, m), dtype=bool)
    for k in range(1, m):
        f = fringes[k]
        delta[k] = np.arctan2(f[3] - f[1], f[0] - f[2])
        determinate[k] = moduli[0] * moduli[k] >= INDETERMINATE_FLOOR
    delta[~determinate] = 0.0
    # Row 0 real by construction (delta is measured against it); rotate each row so column 0 is real.
    phases = delta - delta[:, :1]
    entries = moduli * np.exp(1j * phases)
    indeterminate = [(int(k), int(j)) for k, j in zip(*np.nonzero(~determinate))]
    label = "reconstructed"
    return CharacterizationReport(TransferMatrix(entries, label=label), indeterminate=indeterminate)


def gauge_fix(U) -> TransferMatrix:
    """Return the gauge-equivalent matrix with row 0 and column 0 real and non-negative."""
    a = np.array(as_matrix(U))
    col_phase = np.exp(-1j * np.angle(a[0]))
    a = a * col_phase[None, :]
    row_phase = np.exp(-1j * np.angle(a[:, 0]))
    a = a * row_phase[:, None]
    return TransferMatrix(a, label=getattr(U, "label", ""))


def gauge_align(A, B, iterations: int = 50) -> tuple[TransferMatrix, float]:
    """Find diagonal phases so that D_out B D_in best matches A; return the aligned B and max residual.

    Column phases are seeded from the row of A with the largest overlap with B,
    then row and column phases are refined alternately.
    """
    a, b = as_matrix(A), as_matrix(B)
    if a.shape != b.shape:
        raise DimensionError(f"cannot align {a.shape} with {b.shape}")
    weight = np.abs(a) * np.abs(b)
    if np.any(weight.sum(axis=0) == 0) or np.any(weight.sum(axis=1) == 0):
        warnings.warn("degenerate alignment: a row or column has no overlapping support", stacklevel=2)
    corr = a * b.conj()
    pivot = int(np.argmax(weight.sum(axis=1)))
    col = np.exp(1j * np.angle(corr[pivot]))
    row = np.ones(a.shape[0], dtype=complex)
    for _ in range(iterations):
        new_row = np.exp(1j * np.angle((corr * col.conj()[None, :]).sum(axis=1)))
        new_col = np.exp(1j * np.angle((corr * new_row.conj()[:, None]).sum(axis=0)))
        done = np.allclose(new_row, row, atol=1e-15, rtol=0) and np.allclose(new_col, col, atol=1e-15, rtol=0)
        row, col = new_row, new_col
        if done:
            break
    aligned = row[:, None] * b * col[None, :]
    residual = float(np.max(np.abs(a - aligned)))
    return TransferMatrix(aligned, label=getattr(B, "label", "")), residual


def characterize(device, noise_sigma: float = 0.0, seed: int | None = None, truth=None) -> CharacterizationReport:
    """Simulate probes of ``device``, reconstruct, and report the residual against ``truth``."""
    m = as_matrix(device).shape[0]
    report = reconstruct(simulate_probes(device, noise_sigma, seed), m)
    if truth is not None:
        _, report.residual = gauge_align(truth, report.reconstructed)
    return report
