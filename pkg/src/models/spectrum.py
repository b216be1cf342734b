"""
Liouvillian Spectra

Dense eigenvalues of the truncated oscillator generator paired one-to-one
with the analytic labels -iω(n-m) - γ(n+m), and optionally the spin
factor of the decoupled generator, whose labels are -iμ(n-m).
"""
import logging
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import linear_sum_assignment

from src.hilbert.spaces import FockGeometry, SpinGeometry
from src.models.liouvillians import build_L_ph, build_L_sp
from src.models.params import ModelParams
from src.propagators.oscillator import dressed_eigenvalue

logger = logging.getLogger(__name__)

COLUMNS = [
    "factor",
    "n",
    "m",
    "analytic_real",
    "analytic_imag",
    "computed_real",
    "computed_imag",
    "deviation",
]

Label = Tuple[int, int]


def _pair(
    factor: str,
    computed: np.ndarray,
    labels: List[Label],
    analytic: Callable[[int, int], complex],
) -> pd.DataFrame:
    """Assign each label the eigenvalue closest to it, without reuse."""
    targets = np.array([analytic(n, m) for n, m in labels])
    cost = np.abs(targets[:, None] - computed[None, :])
    rows, cols = linear_sum_assignment(cost)
    frame = pd.DataFrame(
        {
            "factor": factor,
            "n": [labels[i][0] for i in rows],
            "m": [labels[i][1] for i in rows],
            "analytic_real": targets[rows].real,
            "analytic_imag": targets[rows].imag,
            "computed_real": computed[cols].real,
            "computed_imag": computed[cols].imag,
            "deviation": cost[rows, cols],
        }
    )
    return frame[COLUMNS]


def _square_labels(values: Iterable[int]) -> List[Label]:
    values = list(values)
    return [(n, m) for n in values for m in values]


def oscillator_spectrum(params: ModelParams, geo: FockGeometry, levels: Optional[int] = None) -> pd.DataFrame:
    """
    Eigenvalues of L_ph matched to the labels n, m <= levels.

    Args:
        params: Model parameters with γ > 0
        geo: Fock geometry; the dense generator is subject to the dense cap
        levels: Largest label, default cutoff // 2

    Returns:
        DataFrame with COLUMNS, one row per label

    Raises:
        ResourceLimitError: If the dense generator exceeds the cap
    """
    levels = geo.cutoff // 2 if levels is None else levels
    computed = np.linalg.eigvals(build_L_ph(params, geo).superop.to_matrix())
    frame = _pair("oscillator", computed, _square_labels(range(levels + 1)),
                  lambda n, m: dressed_eigenvalue(n, m, params))
    logger.info(f"L_ph spectrum: {len(frame)} labels, worst deviation {frame['deviation'].max():.3e}")
    return frame


def spin_spectrum(params: ModelParams, geo: SpinGeometry, window: Optional[int] = None) -> pd.DataFrame:
    """Eigenvalues of the undissipated spin factor -iμK_M matched to -iμ(n-m), |n|, |m| <= window."""
    window = geo.halfwidth // 2 if window is None else window
    free = params.with_updates(alpha_minus=0.0, alpha_plus=0.0)
    computed = np.linalg.eigvals(build_L_sp(free, geo).superop.to_matrix())
    return _pair("spin", computed, _square_labels(range(-window, window + 1)),
                 lambda n, m: complex(-1j * params.mu * (n - m)))


def spectrum_table(
    params: ModelParams, fock: FockGeometry, spin: Optional[SpinGeometry] = None
) -> pd.DataFrame:
    """Oscillator rows, followed by spin factor rows when ``spin`` is given."""
    frames = [oscillator_spectrum(params, fock)]
    if spin is not None:
        frames.append(spin_spectrum(params, spin))
    return pd.concat(frames, ignore_index=True)


__all__ = ["COLUMNS", "oscillator_spectrum", "spin_spectrum", "spectrum_table"]
