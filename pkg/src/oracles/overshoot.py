"""Detect velocity profiles whose maximum in z is shifted away from the origin."""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from src.spectral.transfer import WaveProfile


@dataclass
class OvershootReport:
    """
    Per-velocity argmax of f(., v_i) and the velocities that overshoot.

    Attributes:
        argmax: z position of the maximum of f(., v_i), one per velocity
        right_overshoot: Indices whose maximum lies right of 0 by more than one cell
        left_overshoot: Indices whose maximum lies left of 0 by more than one cell
        threshold_index: Smallest index of the right-overshooting set, None if empty
        contiguous: True when the right-overshooting indices run up to the largest velocity
    """

    argmax: np.ndarray
    right_overshoot: List[int] = field(default_factory=list)
    left_overshoot: List[int] = field(default_factory=list)
    threshold_index: Optional[int] = None
    contiguous: bool = True

    @property
    def present(self) -> bool:
        return bool(self.right_overshoot or self.left_overshoot)


def overshoot_detect(z, f) -> OvershootReport:
    """
    Locate the maximum of every velocity profile.

    Args:
        z: Increasing grid covering [-L, L]
        f: Gridded distribution of shape (len(z), N), or a WaveProfile

    Returns:
        OvershootReport
    """
    z = np.asarray(z, dtype=float)
    if isinstance(f, WaveProfile):
        f = f.f_grid(z)
    f = np.asarray(f, dtype=float)

    cell = float(np.max(np.diff(z)))
    peaks = z[np.argmax(f, axis=0)]
    right = [int(i) for i in np.nonzero(peaks > cell)[0]]
    left = [int(i) for i in np.nonzero(peaks < -cell)[0]]

    n = f.shape[1]
    contiguous = right == list(range(right[0], n)) if right else True
    return OvershootReport(
        argmax=peaks,
        right_overshoot=right,
        left_overshoot=left,
        threshold_index=right[0] if right else None,
        contiguous=contiguous,
    )
