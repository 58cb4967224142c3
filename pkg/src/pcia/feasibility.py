"""Stream-count feasibility, time sharing, and backhaul accounting.

All counting happens in exact rational arithmetic so that boundary cases
(equality of equation and variable counts) never depend on float rounding.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from fractions import Fraction

__all__ = [
    "FeasibilityVerdict",
    "TimeShareSchedule",
    "BackhaulReport",
    "dof_upper_bound",
    "is_proper_generic",
    "is_proper_partial",
    "time_share_schedule",
    "backhaul_rate",
]


def dof_upper_bound(rx_antennas, tx_antennas) -> int:
    """Largest total stream count the coordinated downlink can support.

    Each user contributes a quarter of its even-rounded antenna total;
    the sum is floored once at the end.
    """
    rx = list(rx_antennas)
    tx = list(tx_antennas)
    if len(rx) != len(tx):
        raise ValueError("need one rx and one tx antenna count per user")
    if any(int(v) < 1 for v in rx + tx):
        raise ValueError("antenna counts must be positive integers")
    total = sum(
        Fraction(int(m) + int(n) - (int(m) + int(n)) % 2, 4)
        for m, n in zip(rx, tx)
    )
    return math.floor(total)


@dataclasses.dataclass(frozen=True)
class FeasibilityVerdict:
    """Outcome of a properness count for one symmetric system."""

    system_label: str
    num_equations: Fraction
    num_variables: Fraction
    proper: bool
    bound_rhs: Fraction  # largest user count the closed form allows


def _check_antenna_floor(num_users: int, m: int, n: int, d_hat: int) -> None:
    floor = math.ceil(Fraction(d_hat, num_users))
    if min(m, n) < floor:
        raise ValueError(
            f"properness needs min(m, n) >= {floor} per-user streams "
            f"(got m={m}, n={n} for {d_hat} total streams over {num_users} users)"
        )


def _verdict(num_users: int, m: int, n: int, extra_tx: int, label: str) -> FeasibilityVerdict:
    c = m + n
    rem = c % 2
    d_hat = dof_upper_bound([m] * num_users, [n] * num_users)
    _check_antenna_floor(num_users, m, n, d_hat)
    per_user = Fraction(d_hat, num_users)
    num_eq = num_users * (num_users - 1) * per_user ** 2
    num_var = num_users * per_user * (c + extra_tx - 2 * per_user)
    if extra_tx == 0:
        bound = 3 + Fraction(4 * rem, c - rem)
    else:
        bound = 3 + Fraction(4 * (n + rem), c - rem)
    return FeasibilityVerdict(
        system_label=label,
        num_equations=num_eq,
        num_variables=num_var,
        proper=num_eq <= num_var,
        bound_rhs=bound,
    )


def is_proper_generic(num_users: int, m: int, n: int) -> FeasibilityVerdict:
    """Properness of a symmetric system without transmitter pairing.

    Evaluated at the stream total from :func:`dof_upper_bound` spread
    evenly (as an exact rational) across users.

    Raises:
        ValueError: when ``min(m, n)`` is below the per-user stream floor.
    """
    d_hat = dof_upper_bound([m] * num_users, [n] * num_users)
    label = f"({m}x{n}, {Fraction(d_hat, num_users)})^{num_users}"
    return _verdict(num_users, m, n, 0, label)


def is_proper_partial(num_users: int, m: int, n: int) -> FeasibilityVerdict:
    """Properness when each message is precoded across a station pair.

    Pairing doubles the transmit dimension seen by each message to ``2n``
    while the stream target stays at the unpaired upper bound, so extra
    precoder variables loosen the count.
    """
    d_hat = dof_upper_bound([m] * num_users, [n] * num_users)
    label = f"({m}x{2 * n}, {Fraction(d_hat, num_users)})^{num_users}"
    return _verdict(num_users, m, n, n, label)


@dataclasses.dataclass(frozen=True)
class TimeShareSchedule:
    """Round-robin slot plan delivering a fractional per-user average.

    ``slot_table[t][k]`` is user ``k``'s stream count in slot ``t``. Over
    ``num_slots`` slots every user totals the same number of streams.
    """

    num_users: int
    dof_total: int
    remainder: int        # users per slot that get the larger count
    num_slots: int
    boosted_slots_per_user: int
    slot_table: tuple

    @property
    def per_user_average(self) -> Fraction:
        return Fraction(self.dof_total, self.num_users)

    def user_slot_total(self, k: int) -> int:
        """Streams user ``k`` accumulates over one full schedule period."""
        return sum(row[k] for row in self.slot_table)


def time_share_schedule(num_users: int, dof_total: int) -> TimeShareSchedule:
    """Slot plan that averages ``dof_total / num_users`` streams per user.

    When the total does not divide evenly, each slot boosts one subset of
    users to the ceiling count; the subsets enumerate all combinations in
    lexicographic order so every user is boosted equally often.
    """
    if num_users < 1 or dof_total < 0:
        raise ValueError("need at least one user and a nonnegative stream total")
    base, remainder = divmod(dof_total, num_users)
    if remainder == 0:
        table = (tuple([base] * num_users),)
        return TimeShareSchedule(num_users, dof_total, 0, 1, 0, table)
    num_slots = math.comb(num_users, remainder)
    boosted = math.comb(num_users - 1, remainder - 1)
    table = []
    for subset in itertools.combinations(range(num_users), remainder):
        row = [base] * num_users
        for k in subset:
            row[k] = base + 1
        table.append(tuple(row))
    return TimeShareSchedule(
        num_users, dof_total, remainder, num_slots, boosted, tuple(table)
    )


_BACKHAUL = {
    ("line", "partial"): lambda k: 2 * k,
    ("ring", "partial"): lambda k: k,
    ("line", "full"): lambda k: k * k,
    ("ring", "full"): lambda k: k * (k - 1),
}


def backhaul_rate(num_users: int, topology: str, coordination: str) -> int:
    """Backhaul load in multiples of one user's message rate.

    Partial coordination forwards each message once around the ring (or
    there and back on a line); full coordination floods every message to
    every station.
    """
    if num_users < 1:
        raise ValueError("need at least one user")
    if coordination == "none":
        return 0
    try:
        return _BACKHAUL[(topology, coordination)](num_users)
    except KeyError:
        raise ValueError(
            f"unknown topology/coordination pair ({topology!r}, {coordination!r})"
        ) from None


@dataclasses.dataclass(frozen=True)
class BackhaulReport:
    """Backhaul load of every topology/coordination pair for one ring size."""

    num_users: int
    partial_line: int
    partial_ring: int
    full_line: int
    full_ring: int

    @classmethod
    def for_users(cls, num_users: int) -> "BackhaulReport":
        return cls(
            num_users=num_users,
            partial_line=backhaul_rate(num_users, "line", "partial"),
            partial_ring=backhaul_rate(num_users, "ring", "partial"),
            full_line=backhaul_rate(num_users, "line", "full"),
            full_ring=backhaul_rate(num_users, "ring", "full"),
        )
