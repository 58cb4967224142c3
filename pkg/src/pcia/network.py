r"""Network model for a partially coordinated multicell MIMO downlink.

Base stations sit on a ring. User ``k`` receives its message jointly from
its own base station and from the previous one on the ring, so on the
transmit side the downlink behaves like an interference channel whose
``k``-th input stacks the antenna groups of that serving pair. This module
holds the static configuration, the random channel draw, and the
reindexing between the physical per-station channel and the equivalent
paired-transmitter channel.
"""

from __future__ import annotations

import dataclasses
from typing import Sequence

import numpy as np

__all__ = [
    "NetworkConfig",
    "ChannelSet",
    "PermutationMap",
    "EquivalentChannel",
    "BeamformerSet",
    "generate_channel",
    "build_permutation",
    "equivalent_channel",
    "split_beamformer",
    "stack_beamformer",
    "effective_overall_precoder",
]


def _as_int_tuple(value, num_users: int, name: str) -> tuple:
    if np.isscalar(value):
        value = [value] * num_users
    out = tuple(int(v) for v in value)
    if len(out) != num_users:
        raise ValueError(f"{name} must have one entry per user, got {len(out)}")
    return out


def _as_float_tuple(value, num_users: int, name: str) -> tuple:
    if np.isscalar(value):
        value = [value] * num_users
    out = tuple(float(v) for v in value)
    if len(out) != num_users:
        raise ValueError(f"{name} must have one entry per user, got {len(out)}")
    return out


@dataclasses.dataclass(frozen=True)
class NetworkConfig:
    """Static description of a coordinated K-cell downlink.

    Attributes:
        rx_antennas: receive antennas per user.
        tx_antennas: transmit antennas per base station.
        dof: data streams per user. Zero marks a user silent in the
            current slot; such users transmit nothing and decode nothing.
        tx_power: total transmit power spent on each user's message,
            shared by its serving pair of base stations.
        noise_power: per-antenna noise variance at every receiver.
    """

    rx_antennas: tuple
    tx_antennas: tuple
    dof: tuple
    tx_power: tuple
    noise_power: float = 1.0

    def __post_init__(self):
        num_users = len(tuple(self.rx_antennas))
        if num_users < 2:
            raise ValueError("the coordination ring needs at least two cells")
        object.__setattr__(
            self, "rx_antennas", _as_int_tuple(self.rx_antennas, num_users, "rx_antennas")
        )
        object.__setattr__(
            self, "tx_antennas", _as_int_tuple(self.tx_antennas, num_users, "tx_antennas")
        )
        object.__setattr__(self, "dof", _as_int_tuple(self.dof, num_users, "dof"))
        object.__setattr__(
            self, "tx_power", _as_float_tuple(self.tx_power, num_users, "tx_power")
        )
        object.__setattr__(self, "noise_power", float(self.noise_power))
        if any(m < 1 for m in self.rx_antennas):
            raise ValueError("every user needs at least one receive antenna")
        if any(n < 1 for n in self.tx_antennas):
            raise ValueError("every base station needs at least one transmit antenna")
        if any(d < 0 for d in self.dof):
            raise ValueError("stream counts cannot be negative")
        for k in range(num_users):
            cap = min(self.rx_antennas[k], self.paired_tx_antennas(k))
            if self.dof[k] > cap:
                raise ValueError(
                    f"user {k} asks for {self.dof[k]} streams but supports at most {cap}"
                )
        if any(p <= 0 for p in self.tx_power):
            raise ValueError("transmit powers must be positive")
        if self.noise_power <= 0:
            raise ValueError("noise power must be positive")

    @classmethod
    def symmetric(cls, num_users: int, rx_antennas: int, tx_antennas: int,
                  dof, tx_power: float = 1.0, noise_power: float = 1.0) -> "NetworkConfig":
        """Build a config where every cell has the same antenna counts."""
        return cls(
            rx_antennas=[rx_antennas] * num_users,
            tx_antennas=[tx_antennas] * num_users,
            dof=[dof] * num_users if np.isscalar(dof) else list(dof),
            tx_power=[tx_power] * num_users,
            noise_power=noise_power,
        )

    @property
    def num_users(self) -> int:
        return len(self.rx_antennas)

    @property
    def total_tx_antennas(self) -> int:
        return sum(self.tx_antennas)

    @property
    def total_rx_antennas(self) -> int:
        return sum(self.rx_antennas)

    @property
    def dof_total(self) -> int:
        return sum(self.dof)

    def secondary(self, k: int) -> int:
        """Index of the neighbour base station also serving user ``k``."""
        return (k - 1) % self.num_users

    def paired_tx_antennas(self, k: int) -> int:
        """Combined antenna count of user ``k``'s serving pair."""
        return self.tx_antennas[k] + self.tx_antennas[self.secondary(k)]

    @property
    def paired_widths(self) -> tuple:
        return tuple(self.paired_tx_antennas(k) for k in range(self.num_users))

    @property
    def active_users(self) -> tuple:
        return tuple(k for k in range(self.num_users) if self.dof[k] > 0)

    def with_dof(self, dof: Sequence) -> "NetworkConfig":
        return dataclasses.replace(self, dof=tuple(int(d) for d in dof))

    def with_power(self, tx_power) -> "NetworkConfig":
        if np.isscalar(tx_power):
            tx_power = [tx_power] * self.num_users
        return dataclasses.replace(self, tx_power=tuple(float(p) for p in tx_power))


@dataclasses.dataclass
class ChannelSet:
    """One realization of the per-station downlink channel.

    ``blocks[i][j]`` is the ``m_i x n_j`` matrix from base station ``j``
    to user ``i``.
    """

    blocks: list

    def __post_init__(self):
        num_users = len(self.blocks)
        if num_users < 1 or any(len(row) != num_users for row in self.blocks):
            raise ValueError("channel blocks must form a square grid")
        self.blocks = [
            [np.asarray(b, dtype=np.complex128) for b in row] for row in self.blocks
        ]
        for i, row in enumerate(self.blocks):
            rows = {b.shape[0] for b in row}
            if len(rows) != 1:
                raise ValueError(f"inconsistent receive dimensions in row {i}")
        for j in range(num_users):
            cols = {self.blocks[i][j].shape[1] for i in range(num_users)}
            if len(cols) != 1:
                raise ValueError(f"inconsistent transmit dimensions in column {j}")

    @property
    def num_users(self) -> int:
        return len(self.blocks)

    @property
    def rx_sizes(self) -> tuple:
        return tuple(row[0].shape[0] for row in self.blocks)

    @property
    def tx_sizes(self) -> tuple:
        return tuple(self.blocks[0][j].shape[1] for j in range(self.num_users))

    def row_block(self, i: int) -> np.ndarray:
        """All of user ``i``'s receive rows, stations side by side."""
        return np.hstack(self.blocks[i])

    def assemble(self) -> np.ndarray:
        return np.vstack([self.row_block(i) for i in range(self.num_users)])


def generate_channel(config: NetworkConfig, seed) -> ChannelSet:
    r"""Draw one i.i.d. Rayleigh-fading realization.

    Entries are circularly symmetric complex Gaussian with unit variance,
    drawn block by block in receiver-major order so the result is a pure
    function of ``(config, seed)``.

    Args:
        config: network description fixing all block shapes.
        seed: anything accepted by ``np.random.default_rng``.

    Returns:
        ChannelSet with ``config.num_users`` squared blocks.
    """
    rng = np.random.default_rng(seed)
    blocks = []
    for i in range(config.num_users):
        row = []
        for j in range(config.num_users):
            shape = (config.rx_antennas[i], config.tx_antennas[j])
            row.append(
                (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
                / np.sqrt(2.0)
            )
        blocks.append(row)
    return ChannelSet(blocks)


@dataclasses.dataclass(frozen=True)
class PermutationMap:
    """Column reindexing from the physical channel to the paired one.

    ``column_order[c]`` gives the physical column feeding equivalent
    column ``c``. Every physical column appears exactly twice because
    each base station serves its own user and one neighbour.
    """

    column_order: np.ndarray
    group_widths: tuple
    n_hat: int

    def __post_init__(self):
        object.__setattr__(
            self, "column_order", np.asarray(self.column_order, dtype=np.intp)
        )
        if self.column_order.ndim != 1:
            raise ValueError("column_order must be one-dimensional")
        if len(self.column_order) != sum(self.group_widths):
            raise ValueError("column_order length must match the group widths")

    def as_matrix(self) -> np.ndarray:
        """Dense 0/1 selection matrix so that H @ P gathers the columns."""
        p = np.zeros((self.n_hat, len(self.column_order)))
        p[self.column_order, np.arange(len(self.column_order))] = 1.0
        return p


def build_permutation(config: NetworkConfig) -> PermutationMap:
    """Column map of the equivalent paired-transmitter channel.

    User 0's group lists its own station's antennas first and then the
    ring neighbour's; every other group lists the neighbour first. That
    ordering matches how the stacked per-user precoders are split into
    primary and secondary parts.
    """
    offsets = np.concatenate(([0], np.cumsum(config.tx_antennas)))
    order = []
    for k in range(config.num_users):
        pair = (k, config.secondary(k)) if k == 0 else (config.secondary(k), k)
        for b in pair:
            order.extend(range(offsets[b], offsets[b] + config.tx_antennas[b]))
    return PermutationMap(
        column_order=np.asarray(order, dtype=np.intp),
        group_widths=config.paired_widths,
        n_hat=config.total_tx_antennas,
    )


@dataclasses.dataclass
class EquivalentChannel:
    """Paired-transmitter view of a channel realization.

    ``blocks[i][k]`` is ``m_i x (n_k' + n_k)``: user ``i``'s channel from
    the pair of stations that cooperate on user ``k``'s message.
    """

    blocks: list

    @property
    def num_users(self) -> int:
        return len(self.blocks)

    @property
    def widths(self) -> tuple:
        return tuple(self.blocks[0][k].shape[1] for k in range(self.num_users))

    def assemble(self) -> np.ndarray:
        return np.vstack([np.hstack(row) for row in self.blocks])


def equivalent_channel(channel: ChannelSet, perm: PermutationMap) -> EquivalentChannel:
    """Gather physical columns into the paired-transmitter block grid.

    Raises:
        ValueError: if the channel's column count does not match the map.
    """
    full = channel.assemble()
    if full.shape[1] != perm.n_hat:
        raise ValueError(
            f"channel has {full.shape[1]} transmit antennas, map expects {perm.n_hat}"
        )
    gathered = full[:, perm.column_order]
    row_edges = np.concatenate(([0], np.cumsum(channel.rx_sizes)))
    col_edges = np.concatenate(([0], np.cumsum(perm.group_widths)))
    blocks = [
        [
            gathered[row_edges[i]:row_edges[i + 1], col_edges[k]:col_edges[k + 1]]
            for k in range(len(perm.group_widths))
        ]
        for i in range(channel.num_users)
    ]
    return EquivalentChannel(blocks)


def split_beamformer(transmit: Sequence, config: NetworkConfig):
    """Split each stacked transmit beamformer into its per-station parts.

    Returns:
        (primary, secondary): lists of the rows applied at the user's own
        station and at the helping neighbour, respectively.
    """
    primary, secondary = [], []
    for k, w in enumerate(transmit):
        w = np.asarray(w)
        if w.shape[0] != config.paired_tx_antennas(k):
            raise ValueError(
                f"user {k} beamformer has {w.shape[0]} rows, "
                f"expected {config.paired_tx_antennas(k)}"
            )
        own = config.tx_antennas[k]
        if k == 0:
            primary.append(w[:own])
            secondary.append(w[own:])
        else:
            helper = config.tx_antennas[config.secondary(k)]
            secondary.append(w[:helper])
            primary.append(w[helper:])
    return primary, secondary


def stack_beamformer(primary: Sequence, secondary: Sequence, config: NetworkConfig):
    """Inverse of :func:`split_beamformer`."""
    transmit = []
    for k in range(config.num_users):
        if k == 0:
            transmit.append(np.vstack([primary[k], secondary[k]]))
        else:
            transmit.append(np.vstack([secondary[k], primary[k]]))
    return transmit


@dataclasses.dataclass
class BeamformerSet:
    """Receive filters plus transmit precoders for one realization.

    ``transmit[k]`` acts on user ``k``'s paired antenna stack; the
    ``primary``/``secondary`` entries are its per-station rows.
    """

    receive: list
    transmit: list
    primary: list
    secondary: list

    @classmethod
    def from_joint(cls, receive: Sequence, transmit: Sequence,
                   config: NetworkConfig) -> "BeamformerSet":
        primary, secondary = split_beamformer(transmit, config)
        return cls(list(receive), list(transmit), primary, secondary)


def effective_overall_precoder(beams: BeamformerSet, config: NetworkConfig) -> np.ndarray:
    """Overall per-station precoder equivalent to the stacked per-pair one.

    The returned matrix ``V`` maps all streams to all physical transmit
    antennas; multiplying the physical channel by ``V`` reproduces the
    equivalent channel applied to the stacked precoders. Each stream
    column touches exactly the two stations of its serving pair.
    """
    row_offsets = np.concatenate(([0], np.cumsum(config.tx_antennas)))
    col_offsets = np.concatenate(([0], np.cumsum(config.dof)))
    v = np.zeros((config.total_tx_antennas, config.dof_total), dtype=np.complex128)
    for k in range(config.num_users):
        cols = slice(col_offsets[k], col_offsets[k + 1])
        own = slice(row_offsets[k], row_offsets[k] + config.tx_antennas[k])
        helper_idx = config.secondary(k)
        helper = slice(row_offsets[helper_idx],
                       row_offsets[helper_idx] + config.tx_antennas[helper_idx])
        v[own, cols] = beams.primary[k]
        v[helper, cols] = beams.secondary[k]
    return v
