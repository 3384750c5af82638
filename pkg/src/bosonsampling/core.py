"""Domain types for transfer matrices and mode configurations.

Mode indices are 0-based throughout the Python API. The CLI accepts the
1-based mode lists used in lab notation (``1,3,5``) and converts them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionError, SchemaError

UNITARY_TOLERANCE = 1e-12
NEAR_UNITARY_TOLERANCE = 0.05

# Deviation at or above which a matrix is rejected outright. A zero matrix sits exactly here.
INVALID_DEVIATION = 1.0


@dataclass(frozen=True)
class ModeConfiguration:
    """Photon occupation numbers, one entry per mode."""

    occupations: tuple[int, ...]

    def __post_init__(self):
        occ = tuple(int(x) for x in self.occupations)
        if any(x < 0 for x in occ):
            raise SchemaError(f"occupation numbers must be non-negative, got {occ}")
        object.__setattr__(self, "occupations", occ)

    @classmethod
    def from_modes(cls, modes: Iterable[int], m: int) -> "ModeConfiguration":
        """Build a configuration from a list of occupied (0-based) modes, repeats allowed."""
        occ = [0] * m
        for k in modes:
            if not 0 <= k < m:
                raise DimensionError(f"mode index {k} out of range for {m} modes")
            occ[k] += 1
        return cls(tuple(occ))

    @property
    def m(self) -> int:
        return len(self.occupations)

    @property
    def n(self) -> int:
        return sum(self.occupations)

    @property
    def collision_free(self) -> bool:
        return all(x <= 1 for x in self.occupations)

    def modes(self) -> list[int]:
        """Occupied modes in ascending order, each repeated by its occupation."""
        return [i for i, k in enumerate(self.occupations) for _ in range(k)]

    def factorial_weight(self) -> int:
        return math.prod(math.factorial(k) for k in self.occupations)

    def __iter__(self) -> Iterator[int]:
        return iter(self.occupations)

    def __len__(self) -> int:
        return len(self.occupations)

    def __getitem__(self, i):
        return self.occupations[i]

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.occupations)) + ")"


def as_config(value: ModeConfiguration | Sequence[int]) -> ModeConfiguration:
    if isinstance(value, ModeConfiguration):
        return value
    return ModeConfiguration(tuple(value))


# Modes 1..6 of the six-mode polarisation circuit, in order.
MODE_LABELS: tuple[str, ...] = ("H1", "V1", "H2", "V2", "H3", "V3")


@dataclass(frozen=True)
class ModeLabeling:
    """Bijective map between mode indices and polarisation/spatial labels."""

    labels: tuple[str, ...] = MODE_LABELS

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise SchemaError("mode labels must be unique")

    def label(self, mode: int) -> str:
        return self.labels[mode]

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def describe(self, config: ModeConfiguration | Sequence[int]) -> str:
        config = as_config(config)
        if config.m != len(self.labels):
            raise DimensionError(f"labeling covers {len(self.labels)} modes, config has {config.m}")
        return " ".join(self.labels[i] for i in config.modes())


@dataclass(frozen=True)
class ValidationReport:
    deviation: float
    status: str  # "unitary" | "near_unitary" | "lossy" | "invalid"
    finite: bool

    @property
    def usable(self) -> bool:
        return self.status != "invalid"


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Linear-optical transfer matrix; entry (i, j) is the amplitude from input i to output j."""

    entries: np.ndarray
    label: str = ""
    unitarity_tolerance: float = UNITARY_TOLERANCE

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise SchemaError(f"transfer matrix must be square with m >= 1, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "TransferMatrix":
        return TransferMatrix(self.entries.conj().T, label=f"{self.label}^dagger" if self.label else "")

    def deviation(self) -> float:
        a = self.entries
        return float(np.max(np.abs(a.conj().T @ a - np.eye(self.m))))

    def validate(self) -> ValidationReport:
        return validate(self)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
            "label": self.label,
        }

    @classmethod
    def from_json(cls, data: dict) -> "TransferMatrix":
        try:
            m = int(data["m"])
            re = np.asarray(data["re"], dtype=float)
            im = np.asarray(data["im"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad transfer matrix JSON: {exc}") from exc
        if re.shape != (m, m) or im.shape != (m, m):
            raise SchemaError(f"re/im arrays must be {m}x{m}, got {re.shape} and {im.shape}")
        return cls(re + 1j * im, label=str(data.get("label", "")))

    def __eq__(self, other):
        if not isinstance(other, TransferMatrix):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.entries, other.entries)

    __hash__ = None


def as_matrix(value: TransferMatrix | np.ndarray) -> np.ndarray:
    if isinstance(value, TransferMatrix):
        return value.entries
    return np.asarray(value, dtype=complex)


def validate(matrix: TransferMatrix | np.ndarray) -> ValidationReport:
    """Classify a matrix by its worst-case departure from unitarity, max |U^dagger U - I|.

    Measured devices are lossy, so matrices beyond the near-unitary band are
    still accepted for probability calculations; only non-finite matrices and
    matrices at least as far from unitary as the zero matrix are invalid.
    """
    a = as_matrix(matrix)
    if not np.all(np.isfinite(a)):
        return ValidationReport(deviation=math.inf, status="invalid", finite=False)
    tol = matrix.unitarity_tolerance if isinstance(matrix, TransferMatrix) else UNITARY_TOLERANCE
    dev = float(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))))
    if dev <= tol:
        status = "unitary"
    elif dev <= NEAR_UNITARY_TOLERANCE:
        status = "near_unitary"
    elif dev < INVALID_DEVIATION:
        status = "lossy"
    else:
        status = "invalid"
    return ValidationReport(deviation=dev, status=status, finite=True)


def enumerate_output_configurations(m: int, n: int, collision_free_only: bool = False) -> list[ModeConfiguration]:
    """All ways to place ``n`` photons in ``m`` modes, in descending lexicographic order."""
    if m < 1 or n < 0:
        raise DimensionError(f"need m >= 1 and n >= 0, got m={m}, n={n}")
    if collision_free_only:
        if n > m:
            return []
        out = []
        for chosen in itertools.combinations(range(m), n):
            occ = [0] * m
            for k in chosen:
                occ[k] = 1
            out.append(ModeConfiguration(tuple(occ)))
        return out
    out = []
    # combinations_with_replacement yields non-decreasing mode tuples, which map to
    # occupation vectors in descending lexicographic order.
    for modes in itertools.combinations_with_replacement(range(m), n):
        occ = [0] * m
        for k in modes:
            occ[k] += 1
        out.append(ModeConfiguration(tuple(occ)))
    return out


def random_unitary(m: int, seed: int) -> TransferMatrix:
    """Haar-random unitary from the QR decomposition of a complex Ginibre matrix."""
    if m < 1:
        raise DimensionError(f"m must be >= 1, got {m}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return TransferMatrix(q, label=f"haar-m{m}-seed{seed}")


def balanced_splitter() -> TransferMatrix:
    """The 50:50 beamsplitter [[1, 1], [1, -1]] / sqrt(2)."""
    s = 1.0 / math.sqrt(2.0)
    return TransferMatrix(np.array([[s, s], [s, -s]]), label="balanced-splitter")


_PUBLISHED = {
    "2photon": [
        [0.297, 0.325, 0.126, 0.500, 0.430, 0.253],
        [0.330, -0.302 - 0.011j, 0.001 + 0.503j, 0.028 - 0.390j, 0.221 + 0.118j, -0.385 - 0.213j],
        [0.388, 0.182 + 0.248j, -0.220 + 0.133j, -0.212 + 0.204j, -0.127 - 0.386j, 0.108 - 0.081j],
        [0.311, -0.220 - 0.315j, -0.169 - 0.246j, 0.190 + 0.157j, -0.073 - 0.089j, -0.227 + 0.355j],
        [0.396, -0.222 - 0.169j, 0.387 - 0.130j, -0.265 + 0.004j, -0.103 + 0.202j, 0.353 - 0.112j],
        [0.279, 0.322 + 0.244j, -0.101 - 0.239j, -0.051 - 0.400j, -0.184 + 0.320j, -0.217 + 0.074j],
    ],
    "3photon": [
        [0.334, 0.277, 0.125, 0.479, 0.415, 0.237],
        [0.273, -0.329 - 0.051j, 0.055 + 0.478j, 0.021 - 0.121j, 0.197 + 0.128j, -0.345 - 0.253j],
        [0.420, 0.140 + 0.242j, -0.191 + 0.198j, -0.195 + 0.204j, -0.139 - 0.393j, 0.113 - 0.085j],
        [0.284, -0.197 - 0.367j, -0.194 - 0.224j, 0.189 + 0.190j, -0.072 - 0.106j, -0.278 + 0.333j],
        [0.340, -0.329 - 0.049j, 0.328 - 0.312j, -0.144 + 0.042j, -0.131 + 0.187j, 0.283 - 0.216j],
        [0.324, 0.344 + 0.036j, -0.114 - 0.101j, -0.206 - 0.398j, -0.111 + 0.351j, -0.098 + 0.208j],
    ],
}


def published_matrix(name: str) -> TransferMatrix:
    """Measured 6-mode device matrices (3-decimal precision), keyed ``"2photon"`` or ``"3photon"``."""
    try:
        rows = _PUBLISHED[name]
    except KeyError:
        raise SchemaError(f"unknown published matrix {name!r}; choose from {sorted(_PUBLISHED)}") from None
    return TransferMatrix(np.array(rows, dtype=complex), label=f"measured-{name}")


__all__ = [
    "ModeConfiguration",
    "ModeLabeling",
    "MODE_LABELS",
    "TransferMatrix",
    "ValidationReport",
    "as_config",
    "as_matrix",
    "balanced_splitter",
    "enumerate_output_configurations",
    "published_matrix",
    "random_unitary",
    "validate",
]
