"""Disjunctive formation logic as smooth residuals.

A disjunction ``g_1 <= 0 or ... or g_k <= 0`` becomes ``alpha_j * g_j <= 0``
with ``sum(alpha) == 1``, alpha in [0, 1]. Inequality residuals are in the
canonical ``<= 0`` form and equality residuals in ``== 0`` form.
"""

from typing import Dict, List, Sequence, Tuple

from src.constants import FORMATION_MAX_SPACING_B, FORMATION_MIN_SPACING_B
from src.exceptions import InputError
from src.models.mission import FormationOrder


def disjunction_residuals(g_values: Sequence, alphas: Sequence) -> Tuple[List, object]:
    """Returns (inequality residuals alpha_j*g_j, equality residual sum(alpha) - 1)"""
    if len(g_values) != len(alphas) or not g_values:
        raise InputError('disjunction_residuals needs one alpha per proposition')
    ineq = [a * g for a, g in zip(alphas, g_values)]
    total = alphas[0]
    for a in alphas[1:]:
        total = total + a
    return ineq, total - 1.0


def formation_band_residuals(D, alpha, b: float) -> List:
    """Residuals (<= 0) of alpha(D-20b), (1-alpha)(20b-D), -alpha, alpha-1, 10b-D.

    The band rows are divided by 20b and the floor by 10b, so a floor residual
    within tol guarantees D >= 10b(1 - tol).
    """
    if not b > 0.0:
        raise InputError(f'Wingspan must be positive, got {b}')
    upper = FORMATION_MAX_SPACING_B * b
    lower = FORMATION_MIN_SPACING_B * b
    return [
        alpha * (D - upper) / upper,
        (1.0 - alpha) * (upper - D) / upper,
        -alpha,
        alpha - 1.0,
        (lower - D) / lower,
    ]


def band_feasible(D: float, alpha: float, b: float, tol: float = 0.0) -> bool:
    return all(r <= tol for r in formation_band_residuals(D, alpha, b))


def couple_modes(alphas: Dict[Tuple[str, str], object], order: FormationOrder,
                 vE: Dict[str, object]) -> List:
    """Equality residuals tying each aircraft's mode to the pair directly ahead of it.

    Two aircraft: vE(trailing) = alpha, vE(leader) = 0. Three aircraft:
    vE(intermediate) = alpha(leader, intermediate), vE(trailing) =
    alpha(intermediate, trailing), vE(leader) = 0.
    """
    pairs = order.adjacent_pairs()
    missing = [p for p in pairs if p not in alphas]
    if missing:
        raise InputError(f'No disjunction variable for pairs {missing}')
    unknown = set(vE) - set(order.roles)
    if unknown:
        raise InputError(f'Aircraft {sorted(unknown)} are not part of formation {order.roles}')
    residuals = []
    if order.leader in vE:
        residuals.append(vE[order.leader])
    for ahead, behind in pairs:
        if behind in vE:
            residuals.append(vE[behind] - alphas[(ahead, behind)])
    return residuals


def coupled_modes(alphas: Dict[Tuple[str, str], object], order: FormationOrder) -> Dict[str, object]:
    """The vE assignment that zeroes couple_modes"""
    modes = {order.leader: 0.0}
    for ahead, behind in order.adjacent_pairs():
        modes[behind] = alphas[(ahead, behind)]
    return modes
