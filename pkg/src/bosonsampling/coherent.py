"""Phase-averaged intensity correlations for equal-amplitude coherent-state inputs.

With unit fields E_i = exp(i theta_i) on the input modes, the output field is
E_j = sum_i U_ij E_i. The mutually coherent correlation averages prod_{j in T} |E_j|^2
over all input phases; the incoherent one replaces each |E_j|^2 by sum_i |U_ij|^2.

Both quantities are divided by prod_j t_j!, so they sum to the same total over
all output multisets of a given size (and the visibility, a ratio, is unaffected).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ModeConfiguration, as_config, as_matrix
from .errors import DimensionError, NumericalDomainError, SchemaError

COHERENT_MAX = 5
UNREACHABLE_FLOOR = 1e-15


@dataclass(frozen=True)
class CoherentInput:
    """Distinct (0-based) input modes, each fed a unit-amplitude coherent state."""

    modes: tuple[int, ...]

    def __post_init__(self):
        modes = tuple(int(k) for k in self.modes)
        if not modes:
            raise SchemaError("coherent input needs at least one mode")
        if len(set(modes)) != len(modes):
            raise SchemaError(f"coherent input modes must be distinct, got {modes}")
        object.__setattr__(self, "modes", modes)

    @property
    def n(self) -> int:
        return len(self.modes)

    @classmethod
    def from_config(cls, S: ModeConfiguration | Sequence[int]) -> "CoherentInput":
        S = as_config(S)
        if not S.collision_free:
            raise SchemaError(f"coherent inputs need a collision-free configuration, got {S}")
        return cls(tuple(S.modes()))


def _as_input(inputs) -> CoherentInput:
    if isinstance(inputs, CoherentInput):
        return inputs
    if isinstance(inputs, ModeConfiguration):
        return CoherentInput.from_config(inputs)
    return CoherentInput(tuple(inputs))


def _check(a: np.ndarray, inputs: CoherentInput, T: ModeConfiguration):
    m = a.shape[0]
    if T.m != m:
        raise DimensionError(f"output configuration has {T.m} modes, matrix has {m}")
    if any(not 0 <= k < m for k in inputs.modes):
        raise DimensionError(f"input modes {inputs.modes} out of range for {m} modes")
    if T.n != inputs.n:
        raise DimensionError(f"{inputs.n} coherent inputs but output configuration holds {T.n}")
    if inputs.n > COHERENT_MAX:
        raise NumericalDomainError(f"coherent expansion limited to n <= {COHERENT_MAX}, got {inputs.n}")


def coherent_p0(U, inputs, T) -> float:
    """Phase-averaged correlation with all inputs mutually coherent (zero delay).

    Expanding prod_k |E_{j_k}|^2 gives terms U_{a_1 j_1}..U_{a_n j_n} conj(U_{b_1 j_1}..U_{b_n j_n})
    with phase exp(i(sum theta_a - sum theta_b)). Only terms where the index tuple b
    is a rearrangement of a survive the phase average, so the result is a sum over
    input multisets c of |sum over distinct arrangements of c of prod_k U_{a_k j_k}|^2.
    """
    a = as_matrix(U)
    inputs = _as_input(inputs)
    T = as_config(T)
    _check(a, inputs, T)
    outputs = T.modes()
    total = 0.0
    for multiset in itertools.combinations_with_replacement(inputs.modes, inputs.n):
        amp = 0j
        for arrangement in sorted(set(itertools.permutations(multiset))):
            term = 1 + 0j
            for i, j in zip(arrangement, outputs):
                term *= a[i, j]
            amp += term
        total += abs(amp) ** 2
    return total / T.factorial_weight()


def coherent_pinf(U, inputs, T) -> float:
    """Correlation for mutually incoherent inputs: prod over the multiset T of sum_i |U_ij|^2."""
    a = as_matrix(U)
    inputs = _as_input(inputs)
    T = as_config(T)
    _check(a, inputs, T)
    intensity = (np.abs(a[list(inputs.modes), :]) ** 2).sum(axis=0)
    value = 1.0
    for j in T.modes():
        value *= float(intensity[j])
    return value / T.factorial_weight()


def coherent_visibility(U, inputs, T) -> float:
    pinf = coherent_pinf(U, inputs, T)
    if pinf <= UNREACHABLE_FLOOR:
        raise NumericalDomainError(f"output {as_config(T)} is unreachable from the coherent inputs")
    return (pinf - coherent_p0(U, inputs, T)) / pinf
