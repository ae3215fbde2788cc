"""A-posteriori check of the frozen sign pattern behind the tumbling rates."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.fields.chemoattractant import SignalField
from src.fields.nutrient import NutrientSolution


@dataclass
class AnsatzReport:
    """
    Outcome of the ansatz check.

    n_increasing is None when the nutrient check does not apply (no nutrient
    field, e.g. c <= 0).
    """

    s_increasing_left: bool
    s_decreasing_right: bool
    s_argmax_at_origin: bool
    s_argmax: float
    n_increasing: Optional[bool]

    @property
    def n_check(self) -> str:
        if self.n_increasing is None:
            return 'not-applicable'
        return 'pass' if self.n_increasing else 'fail'

    @property
    def valid(self) -> bool:
        s_ok = self.s_increasing_left and self.s_decreasing_right and self.s_argmax_at_origin
        return s_ok and self.n_increasing is not False


def ansatz_check(signal: SignalField, nutrient: Optional[NutrientSolution] = None) -> AnsatzReport:
    """
    Check that S peaks at the origin and N increases.

    Args:
        signal: Tabulated S on an increasing grid containing 0
        nutrient: Tabulated N, or None when not applicable

    Returns:
        AnsatzReport
    """
    z, s = signal.z, signal.s
    j = int(np.argmax(s))
    cell = max(
        z[j] - z[j - 1] if j > 0 else 0.0,
        z[j + 1] - z[j] if j < z.size - 1 else 0.0,
    )

    n_increasing = None
    if nutrient is not None:
        n = nutrient.n
        n_increasing = bool(np.all(np.diff(n) >= 0) and n[-1] > n[0])

    return AnsatzReport(
        s_increasing_left=bool(np.all(np.diff(s[:j + 1]) >= 0)),
        s_decreasing_right=bool(np.all(np.diff(s[j:]) <= 0)),
        s_argmax_at_origin=bool(abs(z[j]) <= cell),
        s_argmax=float(z[j]),
        n_increasing=n_increasing,
    )
