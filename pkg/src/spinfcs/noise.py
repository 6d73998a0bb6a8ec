"""Trajectory-level error channels and the post-selection stack.

Amplitude damping is unraveled as stochastic quantum jumps: between gate
layers every qubit decays with a per-half-layer probability
1 - exp(-1/(2 T1)), uniform across qubits.  Qubits outside the light cone
never see gates and reduce to classical bits decaying with 1 - exp(-t/T1).
Readout errors flip measured bits at independent 0->1 and 1->0 rates.  The
causal filter rejects measured bitstrings whose excitation rearrangement
needs more half-layers than the circuit contained.
"""

import math
from dataclasses import dataclass

import numpy as np

from .gates import FSimParams, LayerOrder
from .sector import SectorState, sector_basis


@dataclass(frozen=True)
class NoiseConfig:
    """Error-channel strengths; the defaults are noiseless.

    t1_cycles: relaxation scale in units of cycles (inf disables damping).
    e0 / e1: 0->1 and 1->0 readout flip probabilities, scalar or per-qubit.
    angle_jitter_sd: per-gate Gaussian spread of (theta, phi), radians.
    dephasing_sd: per-layer Gaussian Z-rotation spread, radians.
    """

    t1_cycles: float = math.inf
    e0: float | np.ndarray = 0.0
    e1: float | np.ndarray = 0.0
    angle_jitter_sd: float = 0.0
    dephasing_sd: float = 0.0

    def __post_init__(self):
        if not self.t1_cycles > 0:
            raise ValueError(f"t1_cycles must be positive, got {self.t1_cycles}")
        for name in ("e0", "e1"):
            rates = np.asarray(getattr(self, name), dtype=float)
            if np.any(rates < 0) or np.any(rates > 1):
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.angle_jitter_sd < 0 or self.dephasing_sd < 0:
            raise ValueError("noise standard deviations must be >= 0")

    @property
    def half_layer_decay(self) -> float:
        """Per-qubit decay probability applied after each gate layer."""
        if math.isinf(self.t1_cycles):
            return 0.0
        return 1.0 - math.exp(-1.0 / (2.0 * self.t1_cycles))

    def bit_decay(self, duration_cycles: float) -> float:
        """Decay probability of an idle excitation over a circuit duration."""
        if math.isinf(self.t1_cycles):
            return 0.0
        return 1.0 - math.exp(-duration_cycles / self.t1_cycles)


def damping_step(state: SectorState, p_decay: float, rng) -> SectorState:
    """One stochastic amplitude-damping step on every qubit of a state.

    Each qubit, in site order, either jumps (its excitation is removed and
    the state drops one sector) with probability p_decay * <n_q>, or the
    no-jump back-action damps its occupied amplitudes.  Exactly one random
    number is drawn per qubit.
    """
    if p_decay == 0.0:
        return state
    n = state.basis.n_sites
    for q in range(n):
        basis = state.basis
        if basis.n_excitations == 0:
            rng.random(n - q)  # keep the stream aligned
            break
        bit = np.uint64(1 << (n - 1 - q))
        occupied = (basis.words & bit) != 0
        amps = state.amplitudes
        p1 = float(np.sum(np.abs(amps[occupied]) ** 2))
        if rng.random() < p_decay * p1:
            lowered = sector_basis(n, basis.n_excitations - 1)
            new_words = basis.words[occupied] & ~bit
            idx = np.searchsorted(lowered.words, new_words)
            new_amps = np.zeros(lowered.dimension, dtype=np.complex128)
            new_amps[idx] = amps[occupied]
            norm = np.linalg.norm(new_amps)
            state = SectorState(lowered, new_amps / norm)
        else:
            amps[occupied] *= math.sqrt(1.0 - p_decay)
            state.amplitudes = amps / np.linalg.norm(amps)
    return state


def damp_bits(bits: np.ndarray, duration_cycles: float, noise: NoiseConfig, rng):
    """Classical damping of idle qubits: each 1 flips to 0 with probability
    1 - exp(-t/T1).  Draws one random number per bit."""
    bits = np.asarray(bits)
    u = rng.random(bits.shape)
    p = noise.bit_decay(duration_cycles)
    out = bits.copy()
    out[(bits == 1) & (u < p)] = 0
    return out


def damp_trajectory(state_or_bits, duration_cycles: float, noise: NoiseConfig, rng):
    """Damp a sector state (per-layer jump unraveling) or a bit array
    (closed-form idle decay) over a circuit duration in cycles."""
    if isinstance(state_or_bits, SectorState):
        steps = 2.0 * duration_cycles
        n_steps = int(round(steps))
        if abs(steps - n_steps) > 1e-12:
            raise ValueError("duration must be a whole number of half-layers")
        state = state_or_bits
        p = noise.half_layer_decay
        for _ in range(n_steps):
            state = damping_step(state, p, rng)
        return state
    return damp_bits(state_or_bits, duration_cycles, noise, rng)


def readout_flip(bits: np.ndarray, noise: NoiseConfig, rng) -> np.ndarray:
    """Independent per-qubit readout flips: 0->1 at e0, 1->0 at e1."""
    bits = np.asarray(bits)
    e0 = np.broadcast_to(np.asarray(noise.e0, dtype=float), bits.shape)
    e1 = np.broadcast_to(np.asarray(noise.e1, dtype=float), bits.shape)
    u = rng.random(bits.shape)
    out = bits.copy()
    out[(bits == 0) & (u < e0)] = 1
    out[(bits == 1) & (u < e1)] = 0
    return out


def causal_min_half_layers(
    b_initial,
    b_final,
    layer_order: LayerOrder = LayerOrder.EVEN_FIRST,
) -> float:
    """Minimum number of brickwork half-layers turning one word into another.

    Excitations are identified left-to-right in both words (they cannot
    cross), and each layer greedily moves an excitation across an active
    bond when that strictly shortens its way to the target and the
    destination is free; equal-distance moves stay put.  Returns math.inf
    when the popcounts differ (the rearrangement is impossible).
    """
    bi = np.asarray(b_initial, dtype=np.int64)
    bf = np.asarray(b_final, dtype=np.int64)
    if bi.shape != bf.shape or bi.ndim != 1:
        raise ValueError("bitstrings must be 1-D and of equal length")
    n = bi.size
    src = np.flatnonzero(bi == 1)
    tgt = np.flatnonzero(bf == 1)
    if src.size != tgt.size:
        return math.inf
    if np.array_equal(src, tgt):
        return 0
    pos = list(src)
    occ = [False] * n
    for p in pos:
        occ[p] = True
    first = 0 if layer_order is LayerOrder.EVEN_FIRST else 1
    max_layers = 2 * (n + int(np.abs(src - tgt).sum())) + 4
    for layer in range(max_layers):
        parity = (first + layer) % 2
        for bond in range(parity, n - 1, 2):
            left, right = occ[bond], occ[bond + 1]
            if left == right:
                continue  # empty or blocked bond
            site = bond if left else bond + 1
            dest = bond + 1 if left else bond
            j = pos.index(site)
            if abs(dest - tgt[j]) < abs(site - tgt[j]):
                occ[site], occ[dest] = False, True
                pos[j] = dest
        if pos == list(tgt):
            return layer + 1
    return math.inf


def postselect(
    b_initial,
    b_measured,
    cycles: int,
    mode: str = "causal",
    layer_order: LayerOrder = LayerOrder.EVEN_FIRST,
) -> bool:
    """Keep or discard a measured bitstring.

    "number_only" keeps equal-popcount outcomes; "causal" additionally
    requires the rearrangement to fit in the circuit's 2*cycles half-layers.
    """
    bi = np.asarray(b_initial, dtype=np.int64)
    bm = np.asarray(b_measured, dtype=np.int64)
    if bi.sum() != bm.sum():
        return False
    if mode == "number_only":
        return True
    if mode != "causal":
        raise ValueError(f"unknown post-selection mode {mode!r}")
    return causal_min_half_layers(bi, bm, layer_order) <= 2 * cycles


@dataclass
class LayerRealization:
    """One gate layer of a noisy circuit realization."""

    bonds: list[int]
    gate_params: list[FSimParams]
    z_angles: np.ndarray | None  # applied after the layer when present


def disorder_and_dephasing(
    params: FSimParams,
    noise: NoiseConfig,
    rng,
    n_sites: int,
    cycles: int,
    layer_order: LayerOrder = LayerOrder.EVEN_FIRST,
) -> list[LayerRealization]:
    """Draw one shot's noisy circuit: per-gate Gaussian (theta, phi) jitter
    plus random Z rotations between layers.  Zero widths reproduce the
    nominal circuit exactly."""
    even = list(range(0, n_sites - 1, 2))
    odd = list(range(1, n_sites - 1, 2))
    per_cycle = [even, odd] if layer_order is LayerOrder.EVEN_FIRST else [odd, even]
    layers = []
    for _ in range(cycles):
        for bonds in per_cycle:
            if noise.angle_jitter_sd > 0.0:
                gate_params = [
                    params.with_angles(
                        params.theta + noise.angle_jitter_sd * rng.standard_normal(),
                        params.phi + noise.angle_jitter_sd * rng.standard_normal(),
                    )
                    for _ in bonds
                ]
            else:
                gate_params = [params] * len(bonds)
            if noise.dephasing_sd > 0.0:
                z_angles = noise.dephasing_sd * rng.standard_normal(n_sites)
            else:
                z_angles = None
            layers.append(LayerRealization(list(bonds), gate_params, z_angles))
    return layers
