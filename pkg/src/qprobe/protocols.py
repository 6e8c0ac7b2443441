"""Executable probe protocols: single-probe readout cycle and the
non-demolition sequence with alternating probe preparations.

A probe cycle attaches a ground probe, evolves to an odd half-period,
reads sigma_z statistics and verifies that the correlation measures of
the pair are untouched.  The non-demolition sequence alternates excited
and ground probes under the exchange model: the excited stage maps the
family state onto its corner swap and the ground stage restores it
exactly, so measurement statistics can be accumulated over many cycles.

Shot sampling is counter based (SplitMix64 keyed by seed and shot
index), so identical inputs give identical records on any platform and
stages can be sampled concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .measures import CorrelationReport, correlation_report
from .qcore import (
    DensityMatrix,
    SpectralPropagator,
    fidelity,
    partial_trace,
    partial_trace_mat,
    trace_distance,
)
from .states import (
    ProbePrep,
    corner_swap,
    join_with_probe,
    one_param_density,
    two_qubit_space,
)
from .dynamics import (
    ModelConfig,
    ModelVariant,
    NoiseConfig,
    build_hamiltonian,
    initial_joint,
    integrate_master,
    sigma_z_expectation,
)

RESTORED_TOL = 1e-8
Z99 = 2.5758293035489004  # two-sided 99% normal quantile


# ---------------------------------------------------------------------------
# deterministic counter-based sampling

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(seed: int, stream: int) -> int:
    """Independent substream seed for (seed, stream index)."""
    return _splitmix64(_splitmix64(seed & _MASK64) ^ ((stream + 1) & _MASK64))


@dataclass(frozen=True)
class ShotRecord:
    """Binomial measurement record of one stage."""

    shots: int
    count_excited: int
    seed: int

    def __post_init__(self):
        if self.shots < 0:
            raise ValueError("shots must be nonnegative")
        if not 0 <= self.count_excited <= max(self.shots, 0):
            raise ValueError("count out of range")

    @property
    def frequency(self) -> float:
        if self.shots == 0:
            raise ValueError("no shots recorded")
        return self.count_excited / self.shots


def sample_shots(p_excited: float, shots: int, seed: int) -> ShotRecord:
    """Deterministic binomial draw: shot i is excited iff u_i < p.

    u_i comes from SplitMix64 of (seed-derived base + i), so the record
    depends only on (p, shots, seed).
    """
    if not 0.0 <= p_excited <= 1.0:
        raise ValueError("probability out of range")
    if shots < 0:
        raise ValueError("shots must be nonnegative")
    if shots == 0:
        return ShotRecord(0, 0, seed)
    base = np.uint64(_splitmix64(seed & _MASK64))
    z = base + np.arange(shots, dtype=np.uint64)
    z = (z + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(_MASK64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    u = z.astype(np.float64) / float(2 ** 64)
    count = int(np.count_nonzero(u < p_excited))
    return ShotRecord(shots, count, seed)


# ---------------------------------------------------------------------------
# estimation

@dataclass(frozen=True)
class ReadoutModel:
    """Affine readout map P(excited) = offset + slope * x."""

    offset: float
    slope: float

    def probability(self, x: float) -> float:
        return self.offset + self.slope * x

    def invert(self, p: float) -> float:
        return (p - self.offset) / self.slope


#: ground-probe resonant readout at odd half-periods: P(e) = 2 (1 - x)
RESONANT_READOUT = ReadoutModel(2.0, -2.0)
#: exchange-model stage with an excited probe: P(e) = 2 x - 1
EXCHANGE_E_READOUT = ReadoutModel(-1.0, 2.0)
#: exchange-model stage with a ground probe: P(e) = 2 (1 - x)
EXCHANGE_G_READOUT = ReadoutModel(2.0, -2.0)


@dataclass(frozen=True)
class XEstimate:
    """Estimated family parameter with uncertainty and derived measures."""

    x_hat: float
    stderr: float
    ci99: tuple[float, float]
    derived: CorrelationReport

    def __post_init__(self):
        lo, hi = self.ci99
        if not lo <= self.x_hat <= hi:
            raise ValueError("estimate outside its own interval")


def _clamp(v: float) -> float:
    return min(1.0, max(0.5, v))


def estimate_from_counts(
    records: Sequence[tuple[ReadoutModel, ShotRecord]],
) -> XEstimate:
    """Pooled inverse-variance estimate of x from grouped shot records.

    Each group is inverted through its affine readout map; binomial
    variances propagate through the slope, with a 1/(4n) floor so
    boundary frequencies keep a finite weight.
    """
    records = [(m, r) for m, r in records if r.shots > 0]
    if not records:
        raise ValueError("no shots to estimate from")
    num = 0.0
    den = 0.0
    for model, rec in records:
        p_hat = rec.frequency
        var_p = max(p_hat * (1.0 - p_hat), 0.25 / rec.shots) / rec.shots
        var_x = var_p / model.slope ** 2
        w = 1.0 / var_x
        num += w * model.invert(p_hat)
        den += w
    x_raw = num / den
    stderr = float(np.sqrt(1.0 / den))
    x_hat = _clamp(x_raw)
    lo = _clamp(x_raw - Z99 * stderr)
    hi = _clamp(x_raw + Z99 * stderr)
    return XEstimate(x_hat, stderr, (lo, hi), correlation_report(one_param_density(x_hat)))


def estimate_exact(
    probabilities: Sequence[tuple[ReadoutModel, float]],
) -> XEstimate:
    """Infinite-statistics estimate from exact stage probabilities."""
    if not probabilities:
        raise ValueError("no probabilities to estimate from")
    num = sum(m.slope * (p - m.offset) for m, p in probabilities)
    den = sum(m.slope ** 2 for m, _ in probabilities)
    x_hat = _clamp(num / den)
    return XEstimate(
        x_hat, 0.0, (x_hat, x_hat), correlation_report(one_param_density(x_hat))
    )


# ---------------------------------------------------------------------------
# single-probe readout cycle (resonant models)

@dataclass(frozen=True)
class ProbeCycleReport:
    """Outcome of one ground-probe readout cycle."""

    t_read: float
    mean_sigma_z: float
    post_state: DensityMatrix
    state_restored: bool
    measures_before: CorrelationReport
    measures_after: CorrelationReport


def run_probe_cycle(
    x: float,
    cfg: ModelConfig,
    n_half_periods: int = 1,
    noise: Optional[NoiseConfig] = None,
) -> ProbeCycleReport:
    """Attach a ground probe, evolve to t = n pi/(2 g), read sigma_z.

    n must be odd: at even multiples the probe returns to its ground
    state and carries no information.  Without noise the pair state
    lands exactly on the corner swap of the family state while every
    correlation measure is preserved.
    """
    if cfg.variant not in (ModelVariant.RESONANT_QUBIT, ModelVariant.RESONANT_BOSON):
        raise ValueError("probe cycle runs on the resonant models")
    n = int(n_half_periods)
    if n < 1 or n % 2 == 0:
        raise ValueError("no readout information at even multiples")
    noise = noise or NoiseConfig()
    rho0 = one_param_density(x)
    joint0 = initial_joint(x, cfg, ProbePrep.GROUND)
    t_read = n * np.pi / (2.0 * cfg.g)

    if noise.gamma == 0.0 and noise.collapse_ops is None:
        prop = SpectralPropagator.from_hamiltonian(build_hamiltonian(cfg))
        joint = prop.apply(joint0, t_read)
        reduced = partial_trace(joint, {0, 1})
        probe = partial_trace(joint, {2})
    else:
        result = integrate_master(joint0, cfg, noise, t_read)
        reduced = result.reduced_ab[-1]
        probe = result.probe[-1]

    if cfg.variant is ModelVariant.RESONANT_BOSON:
        # compare on the two-level subspace populations
        post = boson_pair_to_qubits(reduced)
    else:
        post = reduced

    return ProbeCycleReport(
        t_read=t_read,
        mean_sigma_z=sigma_z_expectation(probe),
        post_state=post,
        state_restored=trace_distance(post.mat, rho0.mat) <= RESTORED_TOL,
        measures_before=correlation_report(rho0),
        measures_after=correlation_report(post),
    )


def boson_pair_to_qubits(reduced: DensityMatrix) -> DensityMatrix:
    """Conditional pair state on the {0, 1}-photon subspace.

    Population that leaked above one photon per mode is projected out
    and the block renormalized, so the measures see the state actually
    comparable with the two-level family.
    """
    nb = reduced.space.dims[0]
    out = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    out[i * 2 + j, k * 2 + l] = reduced.mat[i * nb + j, k * nb + l]
    out /= np.trace(out).real
    return DensityMatrix(two_qubit_space(), out)


# ---------------------------------------------------------------------------
# transfer timing for the exchange model

_FIDELITY_X_GRID = (0.6, 0.75, 0.9)
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _exchange_propagator(j: float) -> SpectralPropagator:
    cfg = ModelConfig(ModelVariant.DISPERSIVE_EFFECTIVE, g=1.0, delta=1.0 / (2.0 * j))
    return SpectralPropagator.from_hamiltonian(build_hamiltonian(cfg))


def _swap_fidelity(prop: SpectralPropagator, t: float) -> float:
    total = 0.0
    for x in _FIDELITY_X_GRID:
        rho0 = one_param_density(x)
        joint = join_with_probe(rho0, ProbePrep.EXCITED)
        evolved = prop.apply_mat(joint.mat, t)
        ab = partial_trace_mat(evolved, (2, 2, 2), {0, 1})
        total += fidelity(ab, corner_swap(rho0).mat)
    return total / len(_FIDELITY_X_GRID)


def find_transfer_time(j: float) -> float:
    """Smallest time achieving a complete corner-swap transfer.

    Golden-section search for the fidelity peak, bracketed around the
    collective-coupling candidate pi / (2 sqrt(2) J) inside (0, 4 pi/J].
    The returned time must reach fidelity 1 - 1e-9.
    """
    if j <= 0:
        raise ValueError("exchange strength must be positive")
    prop = _exchange_propagator(j)
    seed = np.pi / (2.0 * np.sqrt(2.0) * j)
    a, b = 0.5 * seed, min(1.5 * seed, 4.0 * np.pi / j)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = _swap_fidelity(prop, c)
    fd = _swap_fidelity(prop, d)
    while b - a > 1e-9 * seed:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = _swap_fidelity(prop, c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = _swap_fidelity(prop, d)
    t_star = 0.5 * (a + b)
    if _swap_fidelity(prop, t_star) < 1.0 - 1e-6:
        raise ValueError("no clean transfer")
    return float(t_star)


@dataclass(frozen=True)
class TransferTimeReport:
    """Fidelity of the located transfer time vs the delta*pi/g^2 candidate."""

    best_time: float
    best_fidelity: float
    candidate_time: float
    candidate_fidelity: float


def transfer_time_report(j: float) -> TransferTimeReport:
    """Evaluate both transfer-time candidates for the exchange model.

    The delta*pi/g^2 rule equals pi/(2J); the collective coupling of
    the symmetric mode is sqrt(2) J, so the actual full swap happens a
    factor sqrt(2) earlier.  Both fidelities are reported so the
    shortfall is documented rather than silently corrected.
    """
    prop = _exchange_propagator(j)
    best = find_transfer_time(j)
    candidate = np.pi / (2.0 * j)
    return TransferTimeReport(
        best_time=best,
        best_fidelity=_swap_fidelity(prop, best),
        candidate_time=float(candidate),
        candidate_fidelity=_swap_fidelity(prop, candidate),
    )


# ---------------------------------------------------------------------------
# non-demolition sequence

@dataclass(frozen=True)
class QndStage:
    """One stage of the sequence: preparation, duration, exact outcome law."""

    probe_prep: ProbePrep
    duration: float
    outcome_p_excited: float

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if not 0.0 <= self.outcome_p_excited <= 1.0:
            raise ValueError("probability out of range")


@dataclass(frozen=True)
class QndStageResult:
    stage: QndStage
    shots: ShotRecord


@dataclass(frozen=True)
class QndRunResult:
    final_state: DensityMatrix
    stages: tuple[QndStageResult, ...]
    estimate: XEstimate


def run_qnd_sequence(
    x: float,
    cfg: Optional[ModelConfig] = None,
    n_cycles: int = 3,
    shots_per_stage: int = 0,
    seed: int = 0,
) -> QndRunResult:
    """Alternating excited/ground probe cycles under the exchange model.

    Each cycle runs an excited-probe stage (pair state -> corner swap)
    followed by a ground-probe stage (pair state restored); the probe
    is measured and discarded after every stage.  Outcomes are grouped
    by preparation and pooled into the estimate.  ``shots_per_stage``
    of zero selects exact-statistics mode, separating protocol
    correctness from sampling noise.
    """
    cfg = cfg or ModelConfig(ModelVariant.DISPERSIVE_EFFECTIVE, g=1.0, delta=10.0)
    if cfg.variant is not ModelVariant.DISPERSIVE_EFFECTIVE:
        raise ValueError("non-demolition sequence runs on the exchange model")
    if n_cycles < 1:
        raise ValueError("need at least one cycle")
    t_star = find_transfer_time(cfg.j_exchange)
    prop = SpectralPropagator.from_hamiltonian(build_hamiltonian(cfg))

    state = one_param_density(x)
    stages: list[QndStageResult] = []
    stage_index = 0
    for _ in range(int(n_cycles)):
        for prep in (ProbePrep.EXCITED, ProbePrep.GROUND):
            joint = prop.apply(join_with_probe(state, prep), t_star)
            probe = partial_trace(joint, {2})
            p_e = min(1.0, max(0.0, float(probe.mat[0, 0].real)))
            record = sample_shots(p_e, shots_per_stage, derive_seed(seed, stage_index))
            stages.append(
                QndStageResult(QndStage(prep, t_star, p_e), record)
            )
            state = partial_trace(joint, {0, 1})
            stage_index += 1

    groups = {ProbePrep.EXCITED: EXCHANGE_E_READOUT, ProbePrep.GROUND: EXCHANGE_G_READOUT}
    if shots_per_stage == 0:
        probs = [
            (groups[s.stage.probe_prep], s.stage.outcome_p_excited) for s in stages
        ]
        estimate = estimate_exact(probs)
    else:
        pooled: dict[ProbePrep, tuple[int, int]] = {}
        for s in stages:
            n, k = pooled.get(s.stage.probe_prep, (0, 0))
            pooled[s.stage.probe_prep] = (n + s.shots.shots, k + s.shots.count_excited)
        records = [
            (groups[prep], ShotRecord(n, k, seed)) for prep, (n, k) in pooled.items()
        ]
        estimate = estimate_from_counts(records)
    return QndRunResult(final_state=state, stages=tuple(stages), estimate=estimate)
