"""Monte Carlo estimation of the transfer distribution, as the experiment
samples it: random initial bitstrings, per-state measurement shots, noise
trajectories, post-selection, and the per-state-normalized power estimator.

Randomness is counter-based for thread-count-independent reproducibility:
every (cycle, initial state) owns a Philox stream keyed by the master seed,
and within a state the initial-bit draw and each shot live in disjoint
counter blocks.  Results therefore depend only on (seed, configuration).

Per-state tallies live on the full grid of right-half count changes,
-n/2..n/2, because noisy number-only-filtered outcomes can land outside the
causal cone |M| <= 2t; causal filtering confines them again.
"""

import concurrent.futures
import logging
from dataclasses import dataclass, field

import numpy as np

from . import stats
from .circuit import ChainConfig
from .ensemble import ImbalanceEnsemble, TransferDistribution
from .gates import LayerOrder
from .noise import (
    NoiseConfig,
    damp_bits,
    damping_step,
    disorder_and_dephasing,
    postselect,
    readout_flip,
)
from .sector import SectorState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SampleConfig:
    """Shot budget and seeding for a sampled run."""

    n_initial_states: int = 100
    shots_per_state: int = 1000
    seed: int = 0
    relabel_enabled: bool = True

    def __post_init__(self):
        if self.n_initial_states < 1 or self.shots_per_state < 1:
            raise ValueError("state and shot counts must be >= 1")


def _philox(seed: int, substream: int, block: int):
    """Generator on the counter block `block` of stream (seed, substream)."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, substream], dtype=np.uint64)
    counter = np.array([0, 0, block, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def _substream(cycles: int, state_index: int) -> int:
    return ((cycles & 0xFFFFFFFF) << 32) | (state_index & 0xFFFFFFFF)


def sample_initial(ens: ImbalanceEnsemble, rng) -> np.ndarray:
    """Draw one initial bitstring: left sites are 1 with probability p,
    right sites are 0 with probability p, independently."""
    u = rng.random(ens.n_qubits)
    return (u < ens.site_excitation_probabilities()).astype(np.int64)


def relabel_if_overfull(bits) -> tuple[np.ndarray, bool]:
    """Complement a more-than-half-full bitstring (and flag it), so the
    physically prepared state never carries more than n/2 excitations."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.sum() > bits.size // 2:
        return 1 - bits, True
    return bits.copy(), False


@dataclass
class StateRecord:
    """Per-initial-state tally of surviving right-count changes.

    `counts[i]` counts shots with N_R(final) - N_R(initial) = i - n/2,
    i.e. M = 2*(i - n/2).
    """

    initial_bits: np.ndarray
    counts: np.ndarray
    shots: int
    kept: int


@dataclass
class SampledRun:
    """Aggregated output of a sampled experiment at one cycle count."""

    cycles: int
    n_qubits: int
    mu: float
    mode: str
    sample: SampleConfig
    records: list[StateRecord] = field(repr=False)

    @property
    def grid(self) -> np.ndarray:
        """M values of the tally columns: 2*(-n/2..n/2)."""
        half = self.n_qubits // 2
        return 2 * np.arange(-half, half + 1)

    @property
    def dropped_states(self) -> list[int]:
        return [i for i, r in enumerate(self.records) if r.kept == 0]

    def surviving_records(self) -> list[StateRecord]:
        return [r for r in self.records if r.kept > 0]

    def per_state_distributions(self) -> np.ndarray:
        """Row-normalized per-state M histograms (surviving states only)."""
        rows = [r.counts / r.kept for r in self.surviving_records()]
        if not rows:
            raise ValueError("no surviving shots in any state")
        return np.array(rows)

    def pooled_counts(self) -> np.ndarray:
        """Raw surviving-shot counts summed over states (for count tests)."""
        return np.sum([r.counts for r in self.records], axis=0)

    def distribution(self) -> TransferDistribution:
        """Uniform average of the per-state normalized histograms; moments
        of this distribution are exactly the double-average estimator.

        Raises:
            ValueError: if surviving mass lies outside the causal cone
                |M| <= 2t (possible for noisy number-only runs; the causal
                filter removes such outcomes).
        """
        mean_row = self.per_state_distributions().mean(axis=0)
        half = self.n_qubits // 2
        t = self.cycles
        probs = np.zeros(2 * t + 1)
        for i, m_half in enumerate(range(-half, half + 1)):
            if mean_row[i] == 0.0:
                continue
            if abs(m_half) > t:
                raise ValueError(
                    f"acausal surviving mass at M={2 * m_half} (|M| > 2t); "
                    "use the causal post-selection mode"
                )
            probs[t + m_half] = mean_row[i]
        return TransferDistribution(t, probs)

    def yield_fraction(self) -> float:
        kept = sum(r.kept for r in self.records)
        total = sum(r.shots for r in self.records)
        return kept / total


def estimate_powers(run: SampledRun, k: int) -> float:
    """<M^k>: uniform outer mean over initial states of the count-weighted
    inner mean over that state's surviving shots.  States with no surviving
    shots are dropped with a warning."""
    if k == 0:
        return 1.0
    dropped = run.dropped_states
    if dropped:
        logger.warning(
            "excluding %d initial state(s) with zero surviving shots: %s",
            len(dropped),
            dropped,
        )
    rows = run.per_state_distributions()
    m_values = run.grid.astype(float)
    return float(np.mean(rows @ (m_values**k)))


def _measure_indices(probabilities, rng, shots):
    cdf = np.cumsum(probabilities)
    cdf[-1] = max(cdf[-1], 1.0)  # guard the top edge against rounding
    u = rng.random(shots)
    return np.searchsorted(cdf, u, side="right")


def _word_bits(word: int, width: int) -> np.ndarray:
    return np.array(
        [(word >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.int64
    )


def _noiseless_state(ens, config, sample, state_index, postselect_mode):
    n = config.n_qubits
    half = n // 2
    sub = _substream(config.cycles, state_index)
    bits = sample_initial(ens, _philox(sample.seed, sub, 0))
    if sample.relabel_enabled:
        phys, flagged = relabel_if_overfull(bits)
    else:
        phys, flagged = bits.copy(), False
    state = SectorState.from_bitstring(phys)
    for _ in range(config.cycles):
        state.apply_cycle(config.params, config.layer_order)
    basis = state.basis
    meas_rng = _philox(sample.seed, sub, 1)
    outcomes = _measure_indices(
        state.probabilities(), meas_rng, sample.shots_per_state
    )
    r_phys = basis.right_ones()[outcomes]
    r_logical = (half - r_phys) if flagged else r_phys
    r_initial = int(bits[half:].sum())
    counts = np.zeros(n + 1, dtype=np.int64)
    if postselect_mode == "causal":
        kept = 0
        full = np.uint64((1 << n) - 1)
        for word, r in zip(basis.words[outcomes], r_logical):
            w_log = int(word ^ full) if flagged else int(word)
            measured = _word_bits(w_log, n)
            if postselect(bits, measured, config.cycles, "causal", config.layer_order):
                counts[half + (int(r) - r_initial)] += 1
                kept += 1
    else:
        np.add.at(counts, half + (r_logical - r_initial), 1)
        kept = sample.shots_per_state  # number conservation is exact here
    return StateRecord(bits, counts, sample.shots_per_state, kept)


def _window_bounds(n_qubits: int, cycles: int) -> tuple[int, int]:
    width = min(n_qubits, 2 * cycles)
    lo = n_qubits // 2 - width // 2
    return lo, lo + width


def _noisy_state(ens, config, sample, noise, state_index, postselect_mode):
    n = config.n_qubits
    t = config.cycles
    half = n // 2
    sub = _substream(t, state_index)
    bits = sample_initial(ens, _philox(sample.seed, sub, 0))
    if sample.relabel_enabled:
        phys, flagged = relabel_if_overfull(bits)
    else:
        phys, flagged = bits.copy(), False
    lo, hi = _window_bounds(n, t)
    p_half = noise.half_layer_decay
    wants_disorder = noise.angle_jitter_sd > 0.0 or noise.dephasing_sd > 0.0
    counts = np.zeros(n + 1, dtype=np.int64)
    kept = 0
    r_initial = int(bits[half:].sum())
    nominal_layers = []
    if t > 0:
        for layer_idx in range(2 * t):
            parity = layer_idx % 2
            if config.layer_order is LayerOrder.ODD_FIRST:
                parity = 1 - parity
            # brickwork parity is anchored to physical site indices
            nominal_layers.append(
                [b for b in range(hi - lo - 1) if (b + lo) % 2 == parity]
            )
    for shot in range(sample.shots_per_state):
        rng = _philox(sample.seed, sub, 1 + shot)
        measured_phys = np.empty(n, dtype=np.int64)
        if t > 0:
            state = SectorState.from_bitstring(phys[lo:hi])
            layers = (
                disorder_and_dephasing(
                    config.params, noise, rng, hi - lo, t, config.layer_order
                )
                if wants_disorder
                else None
            )
            for layer_idx in range(2 * t):
                if layers is not None:
                    realization = layers[layer_idx]
                    for bond, gp in zip(realization.bonds, realization.gate_params):
                        state.apply_fsim(bond, gp)
                    if realization.z_angles is not None:
                        state.apply_diagonal_phases(realization.z_angles)
                else:
                    for bond in nominal_layers[layer_idx]:
                        state.apply_fsim(bond, config.params)
                if p_half > 0.0:
                    state = damping_step(state, p_half, rng)
            idx = _measure_indices(state.probabilities(), rng, 1)[0]
            measured_phys[lo:hi] = _word_bits(
                int(state.basis.words[idx]), hi - lo
            )
        if lo > 0:
            measured_phys[:lo] = damp_bits(phys[:lo], float(t), noise, rng)
        if hi < n:
            measured_phys[hi:] = damp_bits(phys[hi:], float(t), noise, rng)
        measured_phys = readout_flip(measured_phys, noise, rng)
        measured = 1 - measured_phys if flagged else measured_phys
        if postselect_mode != "none" and not postselect(
            bits, measured, t, postselect_mode, config.layer_order
        ):
            continue
        delta_r = int(measured[half:].sum()) - r_initial
        counts[half + delta_r] += 1
        kept += 1
    return StateRecord(bits, counts, sample.shots_per_state, kept)


def run_sampled(
    ens: ImbalanceEnsemble,
    config: ChainConfig,
    sample: SampleConfig,
    *,
    noise: NoiseConfig | None = None,
    postselect_mode: str = "number_only",
    threads: int = 1,
) -> SampledRun:
    """Sample the experiment: draw initial states, evolve, measure shots,
    filter, and tally per-state M histograms.

    With `noise=None` each state is evolved once and shots are drawn from
    the exact outcome distribution; with noise every shot is an independent
    trajectory (disorder realizations included).  Output is bitwise
    independent of `threads`.
    """
    if ens.n_qubits != config.n_qubits:
        raise ValueError(
            f"ensemble on {ens.n_qubits} qubits, config on {config.n_qubits}"
        )
    if postselect_mode not in ("none", "number_only", "causal"):
        raise ValueError(f"unknown post-selection mode {postselect_mode!r}")

    if noise is None:
        mode = "sampled"

        def worker(i):
            return _noiseless_state(ens, config, sample, i, postselect_mode)

    else:
        mode = "noisy-sampled"

        def worker(i):
            return _noisy_state(ens, config, sample, noise, i, postselect_mode)

    indices = range(sample.n_initial_states)
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(worker, indices))
    else:
        records = [worker(i) for i in indices]
    run = SampledRun(
        cycles=config.cycles,
        n_qubits=config.n_qubits,
        mu=ens.mu,
        mode=mode,
        sample=sample,
        records=records,
    )
    if run.dropped_states:
        logger.warning(
            "run has %d initial state(s) with zero surviving shots",
            len(run.dropped_states),
        )
    return run


def _row_statistic(rows, grid, which):
    probs = np.mean(rows, axis=0)
    alpha = stats.central_moments((grid, probs), 4)
    if which == "mean":
        return float(alpha[1])
    if which == "variance":
        return float(alpha[2])
    s, q = stats.skew_kurt(alpha)
    return s if which == "skewness" else q


def moment_report(runs: list[SampledRun]) -> stats.MomentReport:
    """Per-cycle moments of sampled runs with delete-one jackknife sigmas."""
    names = ("mean", "variance", "skewness", "kurtosis")
    values = {name: [] for name in names}
    sigmas = {name: [] for name in names}
    cycles = []
    for run in runs:
        rows = list(run.per_state_distributions())
        grid = run.grid.astype(float)
        cycles.append(run.cycles)
        for which in names:
            values[which].append(_row_statistic(rows, grid, which))
            if len(rows) >= 2:
                jk = stats.jackknife_sigma(
                    lambda subset, w=which: _row_statistic(subset, grid, w),
                    rows,
                )
                sigmas[which].append(jk.sigma)
            else:
                sigmas[which].append(0.0)
    return stats.MomentReport(
        cycles=np.array(cycles, dtype=np.int64),
        mean=np.array(values["mean"]),
        variance=np.array(values["variance"]),
        skewness=np.array(values["skewness"]),
        kurtosis=np.array(values["kurtosis"]),
        sigma_mean=np.array(sigmas["mean"]),
        sigma_variance=np.array(sigmas["variance"]),
        sigma_skewness=np.array(sigmas["skewness"]),
        sigma_kurtosis=np.array(sigmas["kurtosis"]),
    )
