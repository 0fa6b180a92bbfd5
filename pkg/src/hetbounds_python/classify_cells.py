import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class CellClassification:
    """Sign of the selection contrast per unit.

    ``plus[i]`` is True when treatment raises selection (p0 < 1, or a tie).
    ``mu10_plus`` / ``mu11_minus`` are None when the cell is empty.
    """

    plus: np.ndarray
    p0: np.ndarray
    mu10_plus: float | None
    mu11_minus: float | None
    ties: int = 0

    @property
    def minus(self):
        return ~self.plus

    def sign_labels(self):
        return np.where(self.plus, "plus", "minus")


def classify_cells(nuisance):
    """Classify units by the direction of the treatment effect on selection

    Computes the trimming share p0(x) = s(0, x) / s(1, x) and marks a unit
    PLUS when p0 < 1 and MINUS when p0 > 1. Units with |p0 - 1| below
    ``TIE_TOLERANCE`` are assigned PLUS and counted. The cell normalizers are
    full-sample means of the cross-fitted selection probabilities: mean of
    s(0, .) over PLUS units and mean of s(1, .) over MINUS units.

    :param nuisance: cross-fitted nuisances with clipped selection probabilities
    :type nuisance: NuisanceFit
    :returns: the classification
    :rtype: CellClassification
    :examples: classify_cells(nuisance).p0
    """
    s0 = np.asarray(nuisance.s0_hat, dtype=float)
    s1 = np.asarray(nuisance.s1_hat, dtype=float)
    p0 = s0 / s1
    ties = np.abs(p0 - 1.0) < TIE_TOLERANCE
    plus = (p0 < 1.0) | ties
    mu10 = float(np.mean(s0[plus])) if np.any(plus) else None
    mu11 = float(np.mean(s1[~plus])) if np.any(~plus) else None
    if np.any(ties):
        logger.info("%d units with p0 = 1 assigned to the PLUS cell", int(ties.sum()))
    logger.debug("cells: %d PLUS, %d MINUS", int(plus.sum()), int((~plus).sum()))
    return CellClassification(plus=plus, p0=p0, mu10_plus=mu10, mu11_minus=mu11, ties=int(ties.sum()))
