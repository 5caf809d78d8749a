"""First-order radio energy model and the node charging primitive."""

from __future__ import annotations

import numpy as np

from .core import NodeState, RadioParams, Role


def path_loss_exponent(radio: RadioParams, d: float) -> float:
    return radio.gamma_near if d < radio.d_threshold else radio.gamma_far


def tx_cost(radio: RadioParams, k: int, d: float) -> float:
    """Energy to transmit ``k`` bits over ``d`` meters."""
    gamma = path_loss_exponent(radio, d)
    return radio.e_elec * k + radio.e_amp * d**gamma * k


def tx_cost_array(radio: RadioParams, k: int, d: np.ndarray) -> np.ndarray:
    """Vectorised :func:`tx_cost` over an array of distances."""
    gamma = np.where(d < radio.d_threshold, radio.gamma_near, radio.gamma_far)
    return radio.e_elec * k + radio.e_amp * d**gamma * k


def rx_cost(radio: RadioParams, k: int) -> float:
    return radio.e_elec * k


def cpu_cost(radio: RadioParams, k: int) -> float:
    return radio.e_cpu * k


def hop_total_cost(radio: RadioParams, k: int, d: float) -> float:
    """Send + receive + process cost of one ``k``-bit hop of length ``d``."""
    return tx_cost(radio, k, d) + rx_cost(radio, k) + cpu_cost(radio, k)


def death_threshold(radio: RadioParams) -> float:
    """Residual energy below which a node is considered dead: one 1-bit receive."""
    return rx_cost(radio, 1)


def charge(node: NodeState, cost: float, epsilon: float) -> float:
    """Draw ``cost`` joules from ``node`` in place and return the amount drawn.

    If the residual would fall below ``epsilon`` the node spends what it has
    left, its energy is pinned to exactly 0 and it becomes ``Role.DEAD``; the
    returned amount is then less than ``cost``.
    """
    if node.role is Role.DEAD:
        raise RuntimeError(f"node {node.id} is dead and cannot be charged")
    if cost < 0:
        raise ValueError(f"negative cost {cost!r}")
    before = node.energy
    after = before - cost
    if after < epsilon:
        node.energy = 0.0
        node.role = Role.DEAD
        return before
    node.energy = after
    return before - after
