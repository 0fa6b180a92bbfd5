import dataclasses

import numpy as np

from .classify_cells import classify_cells
from .config import ScoreConfig
from .scores import combine_components, score_components

# CONSTANTS ___________________________________________________________________
DIRECTIONS = {
    "s0": {"ds0": 0.05},
    "s1": {"ds1": -0.05},
    "q": {"dq": 0.05},
}


def _mean_score(table, nuisance, reference, config, bound, naive):
    cells = classify_cells(nuisance)
    cells = dataclasses.replace(cells, mu10_plus=reference.mu10_plus, mu11_minus=reference.mu11_minus)
    parts = score_components(table, nuisance, cells, config, bound, naive=naive)
    return float(np.mean(combine_components(parts, bound)))


def orthogonality_check(table, nuisance, cells, t, direction="s0", bound="lower", config=None, naive=False):
    """Finite-difference derivative of the mean score along a nuisance direction

    Evaluates [E_n psi(W, eta + t * delta) - E_n psi(W, eta)] / t, where delta
    adds 0.05 to s(0, .) (``"s0"``), subtracts 0.05 from s(1, .) (``"s1"``) or
    adds 0.05 to every quantile (``"q"``); a dict of ``ds0``/``ds1``/``dq``
    shifts is accepted as well. The cell normalizers stay at their values
    under ``nuisance`` and trimming levels are not rounded to the grid, so
    the derivative reflects the score alone. With ``naive`` only the trimmed
    contrast enters, which serves as a non-orthogonal control.

    :param table: the sample, typically simulated
    :type table: ObservationTable
    :param nuisance: the expansion point, typically the true nuisances
    :type nuisance: NuisanceFit
    :param cells: classification supplying the fixed cell normalizers; computed from ``nuisance`` when None
    :type cells: CellClassification
    :param t: perturbation scale
    :type t: float
    :param direction: perturbation direction
    :type direction: str or dict
    :param bound: ``"lower"`` or ``"upper"``
    :type bound: str
    :param config: score form
    :type config: ScoreConfig
    :param naive: drop correction and plug-in parts
    :type naive: bool
    :returns: derivative estimate, exactly 0 at t = 0
    :rtype: float
    :examples: orthogonality_check(table, true_nuisance(table, roy), None, 0.5, "q")
    """
    if t == 0:
        return 0.0
    shift = DIRECTIONS[direction] if isinstance(direction, str) else dict(direction)
    config = dataclasses.replace(ScoreConfig() if config is None else config, rounding=False)
    reference = classify_cells(nuisance) if cells is None else cells
    base = _mean_score(table, nuisance, reference, config, bound, naive)
    moved = nuisance.shifted(**{key: t * value for key, value in shift.items()})
    return (_mean_score(table, moved, reference, config, bound, naive) - base) / t
