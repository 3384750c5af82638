"""Multi-photon scattering probabilities through a linear-optical network.

For input configuration S and output configuration T, the n x n submatrix
U_ST repeats column j of U t_j times and then row i s_i times. Indistinguishable
photons scatter with probability |Per(U_ST)|^2 / (prod s_i! prod t_j!); fully
distinguishable photons with Per(|U_ST|^2) / (same factorials). Partially
distinguishable photons interpolate via the Gram matrix of photon overlaps.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import ModeConfiguration, TransferMatrix, as_config, as_matrix, enumerate_output_configurations, validate
from .errors import DimensionError, NumericalDomainError, SchemaError
from .permanent import _permutation_table, permanent_naive, permanent_nonneg, permanent_ryser

PARTIAL_MAX = 5
PROBABILITY_SLACK = 1e-9
NORMALIZATION_TOLERANCE = 1e-9

Config = ModeConfiguration | Sequence[int]


@dataclass(frozen=True, eq=False)
class ScatteringSubmatrix:
    u_t: np.ndarray
    u_st: np.ndarray
    source: ModeConfiguration
    target: ModeConfiguration

    @property
    def n(self) -> int:
        return self.u_st.shape[0]

    @property
    def normalization(self) -> int:
        return self.source.factorial_weight() * self.target.factorial_weight()


def build_submatrix(U: TransferMatrix | np.ndarray, S: Config, T: Config) -> ScatteringSubmatrix:
    a = as_matrix(U)
    S, T = as_config(S), as_config(T)
    m = a.shape[0]
    if S.m != m or T.m != m:
        raise DimensionError(f"configurations must have {m} modes, got {S.m} and {T.m}")
    if S.n != T.n:
        raise DimensionError(f"input has {S.n} photons but output has {T.n}")
    u_t = a[:, T.modes()]
    u_st = u_t[S.modes(), :]
    return ScatteringSubmatrix(u_t=u_t, u_st=u_st, source=S, target=T)


def p_quantum(U, S: Config, T: Config) -> float:
    """Probability of output T for indistinguishable photons in S."""
    sub = build_submatrix(U, S, T)
    if sub.n == 0:
        return 1.0
    return abs(permanent_ryser(sub.u_st)) ** 2 / sub.normalization


def p_classical(U, S: Config, T: Config) -> float:
    """Probability of output T for fully distinguishable photons in S."""
    sub = build_submatrix(U, S, T)
    if sub.n == 0:
        return 1.0
    # Distinguishable photons sharing an input mode are not overcounted, so only output factorials divide.
    return permanent_nonneg(np.abs(sub.u_st) ** 2) / sub.target.factorial_weight()


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Pairwise overlaps <psi_k|psi_l> of the photons' internal states, in input-photon order."""

    matrix: np.ndarray

    def __post_init__(self):
        g = np.array(self.matrix, dtype=complex)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise SchemaError(f"Gram matrix must be square, got shape {g.shape}")
        if not np.allclose(g, g.conj().T, atol=1e-12, rtol=0):
            raise SchemaError("Gram matrix must be Hermitian")
        if not np.allclose(np.diag(g), 1.0, atol=1e-12, rtol=0):
            raise SchemaError("Gram matrix must have unit diagonal")
        if np.any(np.abs(g) > 1 + 1e-12):
            raise SchemaError("Gram matrix overlaps must have modulus <= 1")
        if g.shape[0] and np.linalg.eigvalsh(g).min() < -1e-10:
            raise SchemaError("Gram matrix must be positive semidefinite")
        g.setflags(write=False)
        object.__setattr__(self, "matrix", g)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def indistinguishable(cls, n: int) -> "GramMatrix":
        return cls(np.ones((n, n)))

    @classmethod
    def distinguishable(cls, n: int) -> "GramMatrix":
        return cls(np.eye(n))

    @classmethod
    def uniform(cls, n: int, overlap: float) -> "GramMatrix":
        """(1 - overlap) * I + overlap * J."""
        return cls((1 - overlap) * np.eye(n) + overlap * np.ones((n, n)))


def _input_norm(S: ModeConfiguration, g: np.ndarray) -> float:
    """Squared norm of the input state: product over input modes of Per(G) restricted to that mode's photons."""
    norm = 1.0
    start = 0
    for s in S.occupations:
        if s > 1:
            block = g[start:start + s, start:start + s]
            norm *= float(np.real(permanent_naive(block)))
        start += s
    return norm


def p_partial(U, S: Config, T: Config, gram: GramMatrix | np.ndarray) -> float:
    """Output probability for photons with arbitrary pairwise overlaps.

    Explicit double sum over permutation pairs (sigma, rho):
    sum prod_k G[sigma_k, rho_k] * prod_k M[sigma_k, k] * conj(prod_k M[rho_k, k]),
    with M = U_ST and rows of M indexing photons. Limited to n <= 5.
    """
    sub = build_submatrix(U, S, T)
    g = gram.matrix if isinstance(gram, GramMatrix) else GramMatrix(gram).matrix
    n = sub.n
    if g.shape[0] != n:
        raise DimensionError(f"Gram matrix is {g.shape[0]}x{g.shape[0]} but there are {n} photons")
    if n > PARTIAL_MAX:
        raise NumericalDomainError(f"partial distinguishability limited to n <= {PARTIAL_MAX}, got {n}")
    if n == 0:
        return 1.0
    perms = _permutation_table(n)
    amps = np.prod(sub.u_st[perms, np.arange(n)], axis=1)
    overlaps = np.prod(g[perms[:, None, :], perms[None, :, :]], axis=2)
    value = (amps @ overlaps @ amps.conj()).real / (_input_norm(sub.source, g) * sub.target.factorial_weight())
    return float(min(max(value, 0.0), 1.0))


@dataclass
class ProbabilityRecord:
    config: ModeConfiguration
    p_quantum: float
    p_classical: float
    p_model: float | None = None

    def to_json(self) -> dict:
        return {"T": list(self.config.occupations), "pQ": self.p_quantum, "pC": self.p_classical, "pModel": self.p_model}

    @classmethod
    def from_json(cls, data: dict) -> "ProbabilityRecord":
        try:
            return cls(
                config=ModeConfiguration(tuple(data["T"])),
                p_quantum=float(data["pQ"]),
                p_classical=float(data["pC"]),
                p_model=None if data.get("pModel") is None else float(data["pModel"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad probability record: {exc}") from exc


@dataclass
class OutcomeTable:
    source: ModeConfiguration
    records: list[ProbabilityRecord]
    flavor: str = "quantum"
    warnings: list[str] = field(default_factory=list)

    def probabilities(self, flavor: str | None = None) -> np.ndarray:
        flavor = flavor or self.flavor
        if flavor == "quantum":
            return np.array([r.p_quantum for r in self.records])
        if flavor == "classical":
            return np.array([r.p_classical for r in self.records])
        values = [r.p_model for r in self.records]
        if any(v is None for v in values):
            raise SchemaError(f"table has no model probabilities for flavor {flavor!r}")
        return np.array(values, dtype=float)

    @property
    def configs(self) -> list[ModeConfiguration]:
        return [r.config for r in self.records]

    def as_dict(self, flavor: str | None = None) -> dict[tuple[int, ...], float]:
        return {r.config.occupations: p for r, p in zip(self.records, self.probabilities(flavor))}

    def to_json(self) -> list[dict]:
        return [r.to_json() for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["T", "pQ", "pC", "pModel"])
        for r in self.records:
            writer.writerow([" ".join(map(str, r.config.occupations)), repr(r.p_quantum), repr(r.p_classical),
                             "" if r.p_model is None else repr(r.p_model)])
        return buf.getvalue()

    @classmethod
    def from_json(cls, rows: list[dict], source: Config | None = None, flavor: str = "quantum") -> "OutcomeTable":
        records = [ProbabilityRecord.from_json(row) for row in rows]
        if source is None:
            m = records[0].config.m if records else 0
            source = ModeConfiguration((0,) * m)
        return cls(source=as_config(source), records=records, flavor=flavor)


FLAVORS = ("quantum", "classical", "partial")


def full_distribution(
    U,
    S: Config,
    flavor: str = "quantum",
    gram: GramMatrix | np.ndarray | None = None,
    collision_free_only: bool = False,
) -> OutcomeTable:
    """Probability record for every output configuration with the same photon number as S.

    Every record carries the quantum and classical probabilities; the ``partial``
    flavor additionally fills ``p_model`` from the supplied Gram matrix.
    """
    S = as_config(S)
    a = as_matrix(U)
    if S.m != a.shape[0]:
        raise DimensionError(f"input has {S.m} modes but the matrix has {a.shape[0]}")
    if S.n < 1:
        raise DimensionError("input must contain at least one photon")
    if flavor not in FLAVORS:
        raise SchemaError(f"unknown flavor {flavor!r}; choose from {FLAVORS}")
    if flavor == "partial":
        if gram is None:
            raise SchemaError("partial flavor requires a Gram matrix")
        gram = gram if isinstance(gram, GramMatrix) else GramMatrix(gram)
    records = []
    for T in enumerate_output_configurations(S.m, S.n, collision_free_only):
        record = ProbabilityRecord(T, p_quantum(a, S, T), p_classical(a, S, T))
        if flavor == "partial":
            record.p_model = p_partial(a, S, T, gram)
        records.append(record)
    table = OutcomeTable(source=S, records=records, flavor="model" if flavor == "partial" else flavor)
    report = validate(a)
    if report.status != "unitary":
        msg = f"matrix is {report.status} (deviation {report.deviation:.3g}); probabilities need not sum to 1"
        table.warnings.append(msg)
    return table


def sample(
    U,
    S: Config,
    flavor: str = "quantum",
    shots: int = 1,
    seed: int | None = None,
    gram: GramMatrix | np.ndarray | None = None,
) -> list[ModeConfiguration]:
    """i.i.d. draws of output configurations from the exact distribution.

    The whole colliding-inclusive distribution is enumerated, renormalised (so
    lossy matrices can be sampled conditioned on no loss), and sampled with a
    single seeded generator.
    """
    if shots < 1:
        raise SchemaError(f"shots must be >= 1, got {shots}")
    table = full_distribution(U, S, flavor, gram=gram)
    probs = np.clip(table.probabilities(), 0.0, None)
    total = probs.sum()
    if total <= 0:
        raise NumericalDomainError("distribution has zero total probability")
    if abs(total - 1) > NORMALIZATION_TOLERANCE:
        warnings.warn(f"renormalising distribution with total {total:.6g}", stacklevel=2)
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(probs), size=shots, p=probs / total)
    configs = table.configs
    return [configs[i] for i in idx]


def count_samples(draws: Sequence[ModeConfiguration], configs: Sequence[ModeConfiguration]) -> dict[ModeConfiguration, int]:
    """Tally draws against a fixed ordered list of configurations (zeros kept)."""
    counts = {c: 0 for c in configs}
    for d in draws:
        if d not in counts:
            raise DimensionError(f"draw {d} is not among the listed configurations")
        counts[d] += 1
    return counts


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
