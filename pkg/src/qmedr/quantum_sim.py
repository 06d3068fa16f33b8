"""Simulated quantum pipeline over exact statevector algebra.

Phase estimation is evaluated analytically (Fejer-kernel register
distributions per eigenpair of the encoded operator), threshold-oracle
minimum finding runs as a deterministic expected-value loop, and the
digital/analog output states are assembled with either worst-case or seeded
sampled estimation noise. All randomness is drawn from explicit seeds;
deterministic mode is bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import resources
from .block_encoding import BlockEncoding, be_extract
from .classical import EigenSolution, apply_dataset_signs, _first_component_signs
from .embedding import Dataset
from .linalg import hermiticity_defect, hermitize

ANCHOR_OVERLAP_FLOOR = 1e-6


class FixedPointOverflow(ArithmeticError):
    """Raised when a readout magnitude exceeds the fixed-point integer range."""

    def __init__(self, max_value: float, required_int_bits: int):
        self.max_value = max_value
        self.required_int_bits = required_int_bits
        super().__init__(
            f"value {max_value:.6g} needs {required_int_bits} integer bits"
        )


def maximally_entangled_probe(dim: int) -> np.ndarray:
    """Statevector of sum_i |i>|i> / sqrt(dim)."""
    psi = np.zeros(dim * dim)
    psi[np.arange(dim) * dim + np.arange(dim)] = 1.0 / math.sqrt(dim)
    return psi


def partial_trace(psi: np.ndarray, dims: tuple[int, ...], keep: int) -> np.ndarray:
    """Reduced density matrix of one register of a pure state."""
    psi = np.asarray(psi).reshape(dims)
    moved = np.moveaxis(psi, keep, 0).reshape(dims[keep], -1)
    return moved @ moved.conj().T


def qpe_register_distribution(phase: float, q1: int) -> np.ndarray:
    """Exact q1-bit register distribution for a single eigenphase in [0, 1)."""
    k = 1 << q1
    x = k * phase - np.arange(k)
    den = np.sin(np.pi * x / k) ** 2
    num = np.sin(np.pi * x) ** 2
    exact = den < 1e-24
    out = np.empty(k)
    out[exact] = 1.0
    out[~exact] = num[~exact] / (k * k * den[~exact])
    return out


@dataclass(frozen=True)
class PhaseEstimationResult:
    """Analytic phase-register statistics for every retained eigenpair.

    ``mass[j]`` is the full register distribution of eigenpair j (rows sum to
    one); ``weights`` are the probe weights (uniform over pairs). For dilated
    inputs the retained pairs are the positive branch after amplitude
    amplification on the flagged component.
    """

    q1: int
    t: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    mass: np.ndarray
    weights: np.ndarray
    eta: float | None = None
    accuracy_bits: int | None = None
    dilated: bool = False
    success_probability: float = 1.0

    @property
    def register_size(self) -> int:
        return 1 << self.q1

    @property
    def n_pairs(self) -> int:
        return self.eigenvalues.shape[0]

    def total_mass(self) -> float:
        return float(self.weights @ self.mass.sum(axis=1))

    def estimate_for_register(self, k) -> np.ndarray:
        return (np.asarray(k) / self.register_size) * (2.0 * np.pi / self.t)

    def dominant_bins(self) -> np.ndarray:
        return np.argmax(self.mass, axis=1)

    def bins(self, threshold: float = 1e-12) -> list:
        """Pruned (register value, eigenvalue estimate, mass, pair index) tuples."""
        out = []
        for j in range(self.n_pairs):
            row = self.mass[j] * self.weights[j]
            for k in np.nonzero(row > threshold)[0]:
                out.append((int(k), float(self.estimate_for_register(k)), float(row[k]), int(j)))
        return out

    def mass_within(self, j: int, bits: int) -> float:
        """Mass within the bins whose phase is bits-accurate for pair j."""
        k = self.register_size
        phase = (self.eigenvalues[j] * self.t / (2.0 * np.pi)) % 1.0
        offsets = np.arange(k)
        dist = np.abs(offsets / k - phase)
        dist = np.minimum(dist, 1.0 - dist)
        return float(self.mass[j][dist < 2.0 ** (-bits)].sum())


def simulate_qpe(
    be: BlockEncoding,
    q1: int,
    t: float,
    eta: float | None = None,
    accuracy_bits: int | None = None,
    dilated: bool = False,
    cost_log: resources.CostLog | None = None,
) -> PhaseEstimationResult:
    """Exact phase-estimation statistics for the encoded operator.

    The probe is the maximally entangled state over the system register, so
    every eigenvector carries equal weight. For ``dilated`` inputs (encoded
    operator [[0, E], [E^T, 0]]) the positive-eigenvalue branch flagged by the
    dilation qubit is amplified with exact projector algebra and the retained
    pairs are E's singular values with right singular vectors.
    """
    if q1 < 1:
        raise ValueError("q1 must be at least 1")
    if q1 > 26:
        raise ValueError("q1 above 26 would not fit the dense register table")
    a_enc = be_extract(be)
    if hermiticity_defect(a_enc) > 1e-8:
        raise ValueError("encoded operator is not Hermitian; dilate it first")
    a_enc = hermitize(a_enc)
    if not np.iscomplexobj(be.target):
        a_enc = a_enc.real
    w, v = np.linalg.eigh(a_enc)
    if np.max(np.abs(w)) * t >= 2.0 * np.pi:
        raise ValueError("phase wraparound: |eigenvalue| * t reaches 2*pi")

    log = cost_log if cost_log is not None else resources.CostLog()
    log.charge("qpe_runs", 1.0)
    log.charge("qpe_controlled_queries", float((1 << q1) - 1))

    k_reg = 1 << q1
    if not dilated:
        dim = w.shape[0]
        phases = (w * t / (2.0 * np.pi)) % 1.0
        mass = np.stack([qpe_register_distribution(p, q1) for p in phases])
        weights = np.full(dim, 1.0 / dim)
        vectors = _first_component_signs(v)
        return PhaseEstimationResult(
            q1=q1, t=t, eigenvalues=w, eigenvectors=vectors, mass=mass,
            weights=weights, eta=eta, accuracy_bits=accuracy_bits,
            dilated=False, success_probability=1.0,
        )

    two_m = w.shape[0]
    half = two_m // 2
    phases_all = (w * t / (2.0 * np.pi)) % 1.0
    mass_all = np.stack([qpe_register_distribution(p, q1) for p in phases_all])
    pos_bins = np.zeros(k_reg, dtype=bool)
    pos_bins[1 : k_reg // 2] = True
    flagged = np.linalg.norm(v[half:, :], axis=0) ** 2
    branch_mass = (1.0 / two_m) * (flagged**2) * (mass_all[:, pos_bins].sum(axis=1))
    success = float(branch_mass.sum())
    log.charge("qpe_branch_amplification_iterations", resources.grover_iterations(success))

    positive = np.nonzero(w > 0)[0]
    if positive.size != half:
        raise ValueError("dilated operator does not split into +/- pairs; is E singular?")
    sub = v[half:, positive]
    norms = np.linalg.norm(sub, axis=0)
    vectors = _first_component_signs(sub / norms)
    eigenvalues = w[positive]
    mass = mass_all[positive]
    weights = np.full(half, 1.0 / half)
    return PhaseEstimationResult(
        q1=q1, t=t, eigenvalues=eigenvalues, eigenvectors=vectors, mass=mass,
        weights=weights, eta=eta, accuracy_bits=accuracy_bits,
        dilated=True, success_probability=success,
    )


def _threshold_search(candidates: list, total: int, largest: bool) -> tuple:
    """Deterministic expected-value run of the threshold-oracle search.

    Measurement outcomes are replaced by the lower median of the marked set;
    each round charges ceil(pi/4 * sqrt(1/p)) iterations at the exact marked
    mass p. Returns (winner, iterations).
    """
    key = (lambda c: (-c[0], c[1])) if largest else (lambda c: (c[0], c[1]))
    marked = sorted(candidates, key=key)
    iterations = 0
    winner = None
    while marked:
        p = len(marked) / total
        iterations += resources.grover_iterations(p)
        winner = marked[(len(marked) - 1) // 2]
        marked = [c for c in marked if key(c) < key(winner)]
    return winner, iterations


def find_extreme_eigenvalues(
    per: PhaseEstimationResult,
    m: int,
    direction: str = "smallest",
    cost_log: resources.CostLog | None = None,
) -> EigenSolution:
    """Threshold-oracle extraction of the m extreme binned eigenvalues.

    Repeats the simulated minimum/maximum search m times, excluding values
    already found, with ties broken by eigenvector index. If the best
    remaining bin equals the last extracted one the cut is flagged degenerate
    and the returned vectors only span a defensible subspace.
    """
    if direction not in ("smallest", "largest"):
        raise ValueError("direction must be 'smallest' or 'largest'")
    n = per.n_pairs
    if not 1 <= m <= n:
        raise ValueError(f"m must satisfy 1 <= m <= {n}")
    log = cost_log if cost_log is not None else resources.CostLog()

    bins_ = per.dominant_bins()
    remaining = [(int(bins_[j]), j) for j in range(n)]
    chosen: list[tuple[int, int]] = []
    total_iters = 0
    for _ in range(m):
        winner, iters = _threshold_search(remaining, n, largest=direction == "largest")
        total_iters += iters
        chosen.append(winner)
        remaining.remove(winner)
    log.charge("minfind_grover_iterations", float(total_iters))
    log.charge("minfind_invocations", float(m))

    degenerate = bool(remaining) and any(c[0] == chosen[-1][0] for c in remaining)
    idx = [c[1] for c in chosen]
    estimates = per.estimate_for_register(np.array([c[0] for c in chosen], dtype=float))
    vectors = _first_component_signs(per.eigenvectors[:, idx].copy())
    return EigenSolution(
        eigenvalues=np.asarray(estimates, dtype=float),
        eigenvectors=vectors,
        direction=direction,
        route="quantum-binned",
        degenerate_cut=degenerate,
    )


@dataclass(frozen=True)
class InnerProductTable:
    """Estimates of (x_i . v_j)^2 / sqrt(m) with the noise model used."""

    values: np.ndarray
    eps2: float
    mode: str


def recommended_eps2(ds: Dataset, m: int, eps_target: float) -> float:
    """Estimation accuracy that keeps the readout error within eps_target.

    The square-root readout amplifies estimation noise near vanishing
    entries, so the budget scales with eps_target**2 rather than eps_target.
    """
    max_norm2 = float(np.max(ds.row_norms) ** 2)
    return eps_target**2 / (math.sqrt(m) * max(max_norm2, 1e-300))


def _amplitude_estimation_draw(value: float, eps2: float, rng: np.random.Generator) -> float:
    """Seeded draw from an amplitude estimator's register law.

    The raw register distribution has heavy tails, so the estimate is the
    median of nine independent draws (the usual confidence amplification).
    """
    bits = min(max(int(math.ceil(math.log2(1.0 / eps2))) + 4, 4), 26)
    k = 1 << bits
    theta = math.asin(math.sqrt(min(max(value, 0.0), 1.0))) / math.pi
    center = int(round(theta * k))
    window = np.arange(center - 64, center + 65)
    x = k * theta - window
    den = np.sin(np.pi * x / k) ** 2
    num = np.sin(np.pi * x) ** 2
    probs = np.where(den < 1e-24, 1.0, num / (k * k * np.maximum(den, 1e-300)))
    probs /= probs.sum()
    drawn = rng.choice(window, size=9, p=probs)
    est = np.sin(np.pi * (drawn % k) / k) ** 2
    return float(np.median(est))


def estimate_inner_products(
    ds: Dataset,
    sol: EigenSolution,
    eps2: float,
    mode: str = "deterministic",
    rng: np.random.Generator | None = None,
    cost_log: resources.CostLog | None = None,
) -> InnerProductTable:
    """Parallel estimation of (x_i . v_j)^2 / sqrt(m) for all (i, j).

    Deterministic mode perturbs every exact value by the worst-case signed
    bound eps2/2 (positive, so squared readouts stay valid); sampled mode
    draws each estimate from a seeded amplitude-estimation register law.
    """
    if eps2 <= 0:
        raise ValueError("eps2 must be positive")
    if mode not in ("deterministic", "sampled"):
        raise ValueError("mode must be 'deterministic' or 'sampled'")
    m = sol.m
    dim = sol.eigenvectors.shape[0]
    exact = (ds.normalized_rows() @ sol.eigenvectors) ** 2 / math.sqrt(m)

    log = cost_log if cost_log is not None else resources.CostLog()
    # uniform probe weights put exactly m of dim equal branches in the target
    projection_mass = m / dim
    log.charge("step3_amplification_iterations", resources.grover_iterations(projection_mass))
    log.charge("step3_ae_repetitions", float(math.ceil(1.0 / eps2)))
    log.charge("o1_queries", 1.0)
    log.charge("o2_queries", 2.0)
    log.charge("cu_index_writes", float(m))

    if mode == "deterministic":
        noisy = exact + eps2 / 2.0
    else:
        gen = rng if rng is not None else np.random.default_rng(0)
        noisy = np.empty_like(exact)
        flat_in = exact.ravel()
        flat_out = noisy.ravel()
        for pos, val in enumerate(flat_in):
            flat_out[pos] = _amplitude_estimation_draw(float(val), eps2, gen)
    return InnerProductTable(values=noisy, eps2=eps2, mode=mode)


@dataclass(frozen=True)
class DigitalState:
    """Fixed-point readout table of the compressed dataset.

    The modeled state stores each signed value in a q2-bit register behind
    uniform amplitudes 1/sqrt(N*m); ``epsilon_total`` certifies the per-entry
    deviation from the exact projected values.
    """

    entries: np.ndarray
    q2: int
    int_bits: int
    frac_bits: int
    sign_source: str
    epsilon_total: float
    eps2: float
    anchor_index: int | None = None
    amplitude: float = field(default=0.0)

    def __post_init__(self):
        n, m = self.entries.shape
        object.__setattr__(self, "amplitude", 1.0 / math.sqrt(n * m))


@dataclass(frozen=True)
class AnalogState:
    """Amplitude-encoded compressed dataset with its fidelity to the target."""

    amplitudes: np.ndarray
    fidelity_vs_classical: float
    anchor_index: int
    xi_estimates: np.ndarray
    rotation_floor: float


def hadamard_test(
    prep_a: np.ndarray,
    prep_b: np.ndarray,
    mode: str = "real",
    shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Overlap component between the states the two preparations produce.

    Returns Re<psi|phi> (mode "real") or Im<psi|phi> (mode "imag"), computed
    from the exact acceptance probability P(1) = (1 - Re(zeta <psi|phi>))/2,
    optionally replaced by a seeded finite-shot Bernoulli estimate.
    """
    if mode not in ("real", "imag"):
        raise ValueError("mode must be 'real' or 'imag'")
    psi = np.asarray(prep_a)[:, 0]
    phi = np.asarray(prep_b)[:, 0]
    if psi.shape != phi.shape:
        raise ValueError("preparations act on different dimensions")
    z = complex(np.vdot(psi, phi))
    re_zeta = z.real if mode == "real" else -z.imag
    p1 = (1.0 - re_zeta) / 2.0
    if shots is not None:
        gen = rng if rng is not None else np.random.default_rng(0)
        ones = gen.binomial(shots, min(max(p1, 0.0), 1.0))
        re_zeta = 1.0 - 2.0 * ones / shots
    return re_zeta if mode == "real" else -re_zeta


def _state_prep(vec: np.ndarray) -> np.ndarray:
    """Orthogonal preparation whose first column is the given unit vector."""
    n = vec.shape[0]
    e0 = np.zeros(n)
    e0[0] = 1.0
    w = vec - e0
    nrm2 = float(w @ w)
    if nrm2 < 1e-30:
        return np.eye(n)
    return np.eye(n) - 2.0 * np.outer(w, w) / nrm2


def _draw_anchor(ds: Dataset, vectors: np.ndarray, seed: int) -> tuple[int, np.ndarray]:
    """Seeded anchor-sample draw with all eigenvector overlaps above the floor."""
    gen = np.random.default_rng(seed)
    order = gen.permutation(ds.n_samples)
    rows = ds.normalized_rows()
    for idx in order:
        xi = rows[idx] @ vectors
        if np.all(np.abs(xi) > ANCHOR_OVERLAP_FLOOR):
            return int(idx), xi
    raise ValueError("no anchor sample has sufficient overlap with every eigenvector")


def _anchor_signs(
    ds: Dataset,
    sol: EigenSolution,
    seed: int,
    mode: str,
    shots: int,
    rng: np.random.Generator | None,
) -> tuple[np.ndarray, int]:
    """Per-entry sign recovery through anchored overlap tests.

    Each sign is the product of two doubled-register test outcomes, one
    against the sample and one against the column-convention vector (the
    dataset mean direction); the unknown anchor overlap cancels in the
    product, pinning signs to the nonnegative-column-sum convention.
    """
    vectors = sol.eigenvectors
    anchor_idx, xi = _draw_anchor(ds, vectors, seed)
    rows = ds.normalized_rows()
    g = ds.X.sum(axis=0)
    g_norm = np.linalg.norm(g)
    if g_norm < 1e-12:
        signs = np.ones((ds.n_samples, sol.m))
        return signs, anchor_idx
    g_hat = g / g_norm

    sample_products = (rows @ vectors) * xi[None, :]
    reference_products = (g_hat @ vectors) * xi
    if mode == "sampled":
        # each product is the outcome of a finite-shot doubled-register test
        gen = rng if rng is not None else np.random.default_rng(seed + 1)

        def finite_shot(values):
            p1 = np.clip((1.0 - values) / 2.0, 0.0, 1.0)
            return 1.0 - 2.0 * gen.binomial(shots, p1) / shots

        sample_products = finite_shot(sample_products)
        reference_products = finite_shot(reference_products)
    signs = np.sign(sample_products) * np.sign(reference_products)[None, :]
    signs[signs == 0] = 1.0
    return signs, anchor_idx


def assemble_digital_state(
    ds: Dataset,
    sol: EigenSolution,
    table: InnerProductTable,
    q2: int = 32,
    int_bits: int = 7,
    eps_target: float = 1e-2,
    sign_source: str = "anchor",
    reference_signs: np.ndarray | None = None,
    seed: int = 0,
    mode: str = "deterministic",
    shots: int = 100000,
    extra_error: float = 0.0,
    cost_log: resources.CostLog | None = None,
) -> DigitalState:
    """Fixed-point assembly of the digital output table.

    Applies the norm lookup, two multiply-accumulate stages and the square
    root readout to each estimated squared overlap, restores signs per
    ``sign_source``, and quantizes into a (1 sign, int_bits, frac_bits)
    fixed-point format. ``epsilon_total`` is the exact worst-case propagation
    of the estimation bound through the square root plus one quantization
    step (and any caller-supplied encoding allowance).
    """
    frac_bits = q2 - 1 - int_bits
    if frac_bits < 1:
        raise ValueError("q2 leaves no fraction bits")
    if sign_source not in ("anchor", "reference"):
        raise ValueError("sign_source must be 'anchor' or 'reference'")
    m = sol.m
    log = cost_log if cost_log is not None else resources.CostLog()
    log.charge("o1_queries", 1.0)
    log.charge("qma_multiplies", 2.0)

    norms2 = ds.row_norms**2
    squared = np.sqrt(m) * table.values * norms2[:, None]
    magnitudes = np.sqrt(np.clip(squared, 0.0, None))

    if sign_source == "reference":
        if reference_signs is None:
            raise ValueError("reference sign source needs a reference table")
        signs = np.sign(reference_signs)
        signs[signs == 0] = 1.0
        anchor_idx = None
    else:
        signs, anchor_idx = _anchor_signs(ds, sol, seed, mode, shots, None)
        log.charge("hadamard_sign_tests", float(ds.n_samples * m + m))

    values = signs * magnitudes
    max_mag = float(np.max(np.abs(values))) if values.size else 0.0
    if max_mag >= float(1 << int_bits):
        required = int(math.floor(math.log2(max_mag))) + 1
        raise FixedPointOverflow(max_mag, required)
    scale = float(1 << frac_bits)
    quantized = np.round(values * scale) / scale

    noise_bound = table.eps2 / 2.0 if table.mode == "deterministic" else table.eps2
    delta = math.sqrt(m) * norms2[:, None] * noise_bound
    upper = np.sqrt(magnitudes**2 + delta) - magnitudes
    lower = magnitudes - np.sqrt(np.clip(magnitudes**2 - delta, 0.0, None))
    est_error = float(np.max(np.maximum(upper, lower))) if values.size else 0.0
    epsilon_total = est_error + 2.0 ** (-frac_bits) + extra_error

    return DigitalState(
        entries=quantized,
        q2=q2,
        int_bits=int_bits,
        frac_bits=frac_bits,
        sign_source=sign_source,
        epsilon_total=epsilon_total,
        eps2=table.eps2,
        anchor_index=anchor_idx,
    )


def assemble_analog_state(
    ds: Dataset,
    sol: EigenSolution,
    seed: int = 0,
    mode: str = "deterministic",
    shots: int = 100000,
    cost_log: resources.CostLog | None = None,
) -> AnalogState:
    """Amplitude-encoded output through the anchored rotation circuit.

    An anchor sample whose overlaps with every selected eigenvector clear the
    floor supplies the rotation denominators; conditional rotations scaled by
    the smallest estimated overlap, inverse anchor preparation and flagged
    amplitude amplification leave amplitudes proportional to the projected
    values, exactly so when the overlap estimates are exact.
    """
    signed = apply_dataset_signs(sol, ds.X)
    vectors = signed.eigenvectors
    anchor_idx, xi = _draw_anchor(ds, vectors, seed)

    if mode == "sampled":
        gen = np.random.default_rng(seed + 17)
        anchor_prep = _state_prep(ds.normalized_rows()[anchor_idx])
        xi_hat = np.array([
            hadamard_test(anchor_prep, _state_prep(vectors[:, j]), "real",
                          shots=shots, rng=gen)
            for j in range(len(xi))
        ])
    else:
        xi_hat = xi.copy()

    floor = float(np.min(np.abs(xi_hat)))
    if floor <= 0.0:
        raise ValueError("an estimated anchor overlap vanished; redraw with another seed")

    y = ds.X @ vectors
    distortion = xi * (floor / xi_hat)
    unnormalized = y * distortion[None, :]
    norm = np.linalg.norm(unnormalized)
    if norm <= 0:
        raise ValueError("analog amplitudes vanished")
    amplitudes = unnormalized / norm

    x_fro = np.linalg.norm(ds.X)
    success = float(norm**2 / x_fro**2)
    log = cost_log if cost_log is not None else resources.CostLog()
    log.charge("analog_amplification_iterations", resources.grover_iterations(min(success, 1.0)))
    log.charge("qpe_runs", 1.0)

    target = y / np.linalg.norm(y)
    fidelity = float(abs(np.sum(amplitudes * target)))
    return AnalogState(
        amplitudes=amplitudes,
        fidelity_vs_classical=fidelity,
        anchor_index=anchor_idx,
        xi_estimates=xi_hat,
        rotation_floor=floor,
    )
