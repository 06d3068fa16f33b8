"""Block-encoding algebra over explicit desk-scale unitaries.

A block-encoding is a unitary whose top-left block equals ``A / alpha`` up to
a certified error ``epsilon``, with the ancilla register occupying the most
significant qubits. Constructions here build the unitaries explicitly so
every claimed bound can be measured directly; oracle query costs are charged
to an abstract tally instead of being executed.

Composite unitaries (products, Hermitian dilations) keep an exactly factored
form so large register counts stay affordable: the factored objects expose
the same dense matrix (for small dimensions), exact top-left block
extraction, and a unitarity defect bound derived from their verified leaves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import resources
from .linalg import (
    as_square,
    expm,
    hermiticity_defect,
    hermitian_eig,
    hermitize,
    spectral_norm,
)

EXP_NORMALIZATION = float(np.exp(2.0))

_DENSE_CHECK_LIMIT = 1024
_MATERIALIZE_LIMIT = 4096


class BlockEncodingError(ValueError):
    """Raised when a construction cannot certify its claimed encoding."""


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _cs_dilation(c: np.ndarray) -> np.ndarray:
    """One-ancilla unitary dilation of a contraction via the cosine-sine blocks.

    All four blocks are built from a single SVD so the off-diagonal
    cancellations hold to rounding even for singular values at 1.
    """
    u, s, vh = np.linalg.svd(c)
    sines = np.sqrt(np.clip(1.0 - s**2, 0.0, None))
    upper = (u * sines) @ u.conj().T
    lower = (vh.conj().T * sines) @ vh
    return np.block([[c, upper], [lower, -c.conj().T]])


def _householder_prep(amplitudes: np.ndarray) -> np.ndarray:
    """Real orthogonal matrix whose first column is the given unit vector."""
    n = amplitudes.shape[0]
    e0 = np.zeros(n)
    e0[0] = 1.0
    w = amplitudes - e0
    nrm2 = float(w @ w)
    if nrm2 < 1e-30:
        return np.eye(n)
    return np.eye(n) - 2.0 * np.outer(w, w) / nrm2


def _memoized_defect(obj, compute):
    # objects are immutable, so the defect is computed once and cached
    cached = getattr(obj, "_defect_cache", None)
    if cached is None:
        cached = float(compute())
        object.__setattr__(obj, "_defect_cache", cached)
    return cached


@dataclass(frozen=True)
class DenseUnitary:
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def to_dense(self, limit: int = _MATERIALIZE_LIMIT) -> np.ndarray:
        if self.dim > limit:
            raise MemoryError(f"refusing to materialize {self.dim}x{self.dim} unitary")
        return self.matrix

    def top_left(self, d: int) -> np.ndarray:
        return self.matrix[:d, :d]

    def unitarity_defect(self) -> float:
        def compute():
            u = self.matrix
            return np.max(np.abs(u.conj().T @ u - np.eye(self.dim)))

        return _memoized_defect(self, compute)


@dataclass(frozen=True)
class ProductUnitary:
    """Composite on registers (anc_left, anc_right, system); right factor acts first.

    Both factors are block-encoding unitaries over (own ancillas, system); the
    composite's top-left system block is exactly the product of the factors'
    top-left blocks.
    """

    left: "UnitaryLike"
    right: "UnitaryLike"
    anc_left_dim: int
    anc_right_dim: int
    system_dim: int

    @property
    def dim(self) -> int:
        return self.anc_left_dim * self.anc_right_dim * self.system_dim

    def to_dense(self, limit: int = _MATERIALIZE_LIMIT) -> np.ndarray:
        if self.dim > limit:
            raise MemoryError(f"refusing to materialize {self.dim}x{self.dim} unitary")
        al, ar, s = self.anc_left_dim, self.anc_right_dim, self.system_dim
        lm = np.asarray(self.left.to_dense(limit), dtype=complex).reshape(al, s, al, s)
        rm = np.asarray(self.right.to_dense(limit), dtype=complex).reshape(ar, s, ar, s)
        out = np.einsum("iujt,ktlv->ikujlv", lm, rm)
        return out.reshape(self.dim, self.dim)

    def top_left(self, d: int) -> np.ndarray:
        if d != self.system_dim:
            raise ValueError("product extraction is defined on the full system block")
        return self.left.top_left(d) @ self.right.top_left(d)

    def unitarity_defect(self) -> float:
        def compute():
            if self.dim <= _DENSE_CHECK_LIMIT:
                return DenseUnitary(self.to_dense()).unitarity_defect()
            return self.left.unitarity_defect() + self.right.unitarity_defect()

        return _memoized_defect(self, compute)


@dataclass(frozen=True)
class DilationUnitary:
    """Hermitian-dilation wrapper on registers (ancillas, flag qubit, system).

    Realizes swap(1, a+1) . (|0><0| x U + |1><1| x U_dag) . (sigma_x x I) .
    swap(1, a+1); its extracted block is the off-diagonal embedding
    [[0, B], [B_dag, 0]] of the inner encoding's block B.
    """

    inner: "UnitaryLike"
    anc_qubits: int
    system_dim: int

    @property
    def dim(self) -> int:
        return (1 << self.anc_qubits) * 2 * self.system_dim

    def to_dense(self, limit: int = _MATERIALIZE_LIMIT) -> np.ndarray:
        if self.dim > limit:
            raise MemoryError(f"refusing to materialize {self.dim}x{self.dim} unitary")
        u = np.asarray(self.inner.to_dense(limit), dtype=complex)
        inner_dim = u.shape[0]
        total = 2 * inner_dim
        nbits = self.anc_qubits + 1 + int(math.log2(self.system_dim))
        middle = np.zeros((total, total), dtype=complex)
        middle[:inner_dim, :inner_dim] = u
        middle[inner_dim:, inner_dim:] = u.conj().T

        msb = nbits - 1
        swap_bit = nbits - 1 - self.anc_qubits  # qubit a+1, counting qubit 1 as the MSB
        idx = np.arange(total)
        flip = idx ^ (1 << msb)
        if self.anc_qubits == 0:
            perm_swap = idx
        else:
            b1 = (idx >> msb) & 1
            b2 = (idx >> swap_bit) & 1
            perm_swap = idx ^ (((b1 ^ b2) << msb) | ((b1 ^ b2) << swap_bit))

        eye = np.eye(total)
        p_swap = eye[perm_swap]
        p_x = eye[flip]
        return p_swap.T @ middle @ p_x @ p_swap

    def top_left(self, d: int) -> np.ndarray:
        if d != 2 * self.system_dim:
            raise ValueError("dilation extraction is defined on the doubled system block")
        b = self.inner.top_left(self.system_dim)
        out = np.zeros((d, d), dtype=complex)
        out[: self.system_dim, self.system_dim :] = b
        out[self.system_dim :, : self.system_dim] = b.conj().T
        return out

    def unitarity_defect(self) -> float:
        def compute():
            if self.dim <= _DENSE_CHECK_LIMIT:
                return DenseUnitary(self.to_dense()).unitarity_defect()
            return self.inner.unitarity_defect()

        return _memoized_defect(self, compute)


UnitaryLike = DenseUnitary | ProductUnitary | DilationUnitary


@dataclass(frozen=True)
class BlockEncoding:
    """A verified (alpha, ancillas, epsilon)-encoding of ``target``.

    ``unitary`` acts on ``ancillas + system_qubits`` qubits with the ancilla
    register most significant; ``target`` is the (power-of-two padded) matrix
    the encoding claims, and ``epsilon`` a certified bound on the block error.
    Instances are immutable and safe to share across threads.
    """

    unitary: UnitaryLike
    alpha: float
    ancillas: int
    system_qubits: int
    epsilon: float
    target: np.ndarray
    cost: dict = field(default_factory=dict)
    original_dim: int | None = None

    @property
    def system_dim(self) -> int:
        return 1 << self.system_qubits

    def extracted(self) -> np.ndarray:
        return self.alpha * self.unitary.top_left(self.system_dim)

    def block_error(self) -> float:
        return spectral_norm(self.target - self.extracted())


def _verify_encoding(be: BlockEncoding, unitarity_tol: float = 1e-9) -> None:
    err = be.block_error()
    if err > be.epsilon + 1e-9:
        raise BlockEncodingError(
            f"block error {err:.3e} exceeds certified epsilon {be.epsilon:.3e}"
        )
    norm = spectral_norm(be.target)
    if norm > be.alpha + be.epsilon + 1e-9:
        raise BlockEncodingError(
            f"target norm {norm:.6f} exceeds alpha + epsilon = {be.alpha + be.epsilon:.6f}"
        )
    defect = be.unitary.unitarity_defect()
    if defect > unitarity_tol:
        raise BlockEncodingError(f"unitarity defect {defect:.3e} exceeds {unitarity_tol}")


def be_extract(be: BlockEncoding) -> np.ndarray:
    """Return ``alpha * <0|^a U |0>^a``, the matrix the encoding represents."""
    return be.extracted()


def block_encode_dense(a_matrix, alpha: float) -> BlockEncoding:
    """Exact one-ancilla dilation of a dense matrix scaled by ``alpha``.

    The input is zero-padded to the next power-of-two dimension (recorded in
    ``original_dim``); ``alpha`` must dominate the spectral norm.
    """
    a = as_square(np.asarray(a_matrix, dtype=float if not np.iscomplexobj(a_matrix) else complex))
    norm = spectral_norm(a)
    if alpha < norm - 1e-12:
        raise BlockEncodingError(f"alpha {alpha} is below the spectral norm {norm:.6e}")
    orig = a.shape[0]
    if orig < 1:
        raise BlockEncodingError("cannot encode an empty matrix")
    dim = 1 << int(math.ceil(math.log2(orig)))
    padded = np.zeros((dim, dim), dtype=a.dtype)
    padded[:orig, :orig] = a
    contraction = padded / alpha
    u = _cs_dilation(contraction.astype(complex))
    if not np.iscomplexobj(a):
        u = u.real
    be = BlockEncoding(
        unitary=DenseUnitary(u),
        alpha=float(alpha),
        ancillas=1,
        system_qubits=int(math.log2(dim)),
        epsilon=1e-12,
        target=padded,
        cost={"time": resources.dense_encode_cost(dim), "dense_encodings": 1.0},
        original_dim=orig,
    )
    _verify_encoding(be)
    return be


def be_product(ua: BlockEncoding, ub: BlockEncoding) -> BlockEncoding:
    """Encoding of ``A @ B`` from encodings of A and B.

    Ancilla registers stay disjoint; the subnormalization multiplies and the
    errors combine as ``alpha_A*eps_B + alpha_B*eps_A``.
    """
    if ua.system_qubits != ub.system_qubits:
        raise BlockEncodingError("system dimensions do not match")
    unitary = ProductUnitary(
        left=ua.unitary,
        right=ub.unitary,
        anc_left_dim=1 << ua.ancillas,
        anc_right_dim=1 << ub.ancillas,
        system_dim=ua.system_dim,
    )
    be = BlockEncoding(
        unitary=unitary,
        alpha=ua.alpha * ub.alpha,
        ancillas=ua.ancillas + ub.ancillas,
        system_qubits=ua.system_qubits,
        epsilon=ua.alpha * ub.epsilon + ub.alpha * ua.epsilon,
        target=ua.target @ ub.target,
        cost=resources.CostLog(ua.cost).merged(ub.cost),
        original_dim=ua.original_dim,
    )
    _verify_encoding(be)
    return be


def be_hermitian_dilation(be: BlockEncoding) -> BlockEncoding:
    """Embed a (possibly non-Hermitian) encoded H into [[0, H], [H^dag, 0]].

    Keeps alpha, doubles epsilon, and adds one system qubit; the dilated
    operator's eigenpairs are the +/- singular pairs of H.
    """
    h = be.target
    doubled = np.zeros((2 * h.shape[0], 2 * h.shape[1]), dtype=complex)
    doubled[: h.shape[0], h.shape[1] :] = h
    doubled[h.shape[0] :, : h.shape[1]] = h.conj().T
    if not np.iscomplexobj(h):
        doubled = doubled.real
    unitary = DilationUnitary(
        inner=be.unitary,
        anc_qubits=be.ancillas,
        system_dim=be.system_dim,
    )
    out = BlockEncoding(
        unitary=unitary,
        alpha=be.alpha,
        ancillas=be.ancillas,
        system_qubits=be.system_qubits + 1,
        epsilon=2.0 * be.epsilon,
        target=doubled,
        cost=resources.CostLog(be.cost).merged({"dilations": 1.0}),
        original_dim=None,
    )
    _verify_encoding(out)
    return out


def _exp_series(sign: int, eps: float) -> tuple[np.ndarray, float]:
    """Truncated-series coefficients for exp(sign*(1+x)) and their exact tail.

    The expansion about 1 has coefficients ``sign^l * e^sign / l!``; the
    truncation order is the smallest L whose absolute-coefficient tail
    (evaluated at radius 1, in extended precision) is at most eps*B/2 with
    B = e^2 the shared normalization.
    """
    b = EXP_NORMALIZATION
    threshold = eps * b / 2.0
    with mpmath.workdps(60):
        e = mpmath.e
        scale = e if sign > 0 else 1 / e
        partial = mpmath.mpf(0)
        fact = mpmath.mpf(1)
        order = None
        for l in range(0, 64):
            if l > 0:
                fact *= l
            partial += 1 / fact
            tail = scale * (e - partial)
            if tail <= threshold:
                order = l
                break
        if order is None:
            raise BlockEncodingError("series truncation did not converge")
        coeffs = []
        fact = mpmath.mpf(1)
        for l in range(order + 1):
            if l > 0:
                fact *= l
            c = scale / fact
            if sign < 0 and l % 2 == 1:
                c = -c
            coeffs.append(float(c))
    return np.array(coeffs), float(b)


def be_exp(be: BlockEncoding, sign: int, eps: float, kappa: float) -> BlockEncoding:
    """Encoding of ``exp(sign*H)`` for an encoded Hermitian H with spectrum in [1/kappa, 1].

    Realized as a prepare-select-unprepare combination over powers of
    ``H - I``: an index register holds amplitudes proportional to
    sqrt(|c_l|), the select stage applies a one-ancilla dilation of each
    power (with the coefficient's sign folded in), and a dump slot absorbs
    the truncation mass so the subnormalization is exactly e^2. The result
    is an (e^2, index+1 ancillas, e^2*eps)-encoding.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if not (0.0 < eps <= 0.5):
        raise ValueError("eps must lie in (0, 1/2]")
    if kappa < 2.0:
        raise ValueError("kappa must be at least 2")
    h_enc = be_extract(be)
    if hermiticity_defect(h_enc) > 1e-8:
        raise BlockEncodingError("encoded operator must be Hermitian")
    h_enc = hermitize(h_enc)
    if not np.iscomplexobj(be.target):
        h_enc = h_enc.real
    spec = hermitian_eig(h_enc)
    lo, hi = spec.eigenvalues[0], spec.eigenvalues[-1]
    if lo < 1.0 / kappa - 1e-9 or hi > 1.0 + 1e-9:
        raise BlockEncodingError(
            f"spectrum [{lo:.6f}, {hi:.6f}] outside the window [1/{kappa}, 1]"
        )

    coeffs, b_norm = _exp_series(sign, eps)
    order = len(coeffs) - 1
    slots = order + 2  # one extra slot absorbs the truncation mass
    n_idx = max(int(math.ceil(math.log2(slots))), 1)
    idx_dim = 1 << n_idx

    probs = np.zeros(idx_dim)
    probs[: order + 1] = np.abs(coeffs) / b_norm
    probs[order + 1] = max(1.0 - probs.sum(), 0.0)
    prep = _householder_prep(np.sqrt(probs))

    dim = be.system_dim
    blocks = []
    power = np.eye(dim, dtype=h_enc.dtype)
    shift = h_enc - np.eye(dim, dtype=h_enc.dtype)
    for l in range(idx_dim):
        if l <= order:
            blk = math.copysign(1.0, coeffs[l]) * _cs_dilation(power.astype(complex))
            blocks.append(blk)
            power = power @ shift
        elif l == order + 1:
            flip = np.zeros((2 * dim, 2 * dim), dtype=complex)
            flip[:dim, dim:] = np.eye(dim)
            flip[dim:, :dim] = np.eye(dim)
            blocks.append(flip)
        else:
            blocks.append(np.eye(2 * dim, dtype=complex))

    total = idx_dim * 2 * dim
    select = np.zeros((total, total), dtype=complex)
    for l, blk in enumerate(blocks):
        s0 = l * 2 * dim
        select[s0 : s0 + 2 * dim, s0 : s0 + 2 * dim] = blk

    prep_full = np.kron(prep, np.eye(2 * dim))
    u = prep_full.T @ select @ prep_full
    if not np.iscomplexobj(h_enc):
        u = u.real

    target = expm(sign * hermitize(be.target))
    cost = resources.CostLog(be.cost).merged(
        {
            "time": resources.exp_encoding_cost(
                be.alpha, kappa, eps, be.ancillas, be.cost.get("time", 1.0)
            ),
            "exp_encodings": 1.0,
        }
    )
    out = BlockEncoding(
        unitary=DenseUnitary(u),
        alpha=b_norm,
        ancillas=n_idx + 1,
        system_qubits=be.system_qubits,
        epsilon=b_norm * eps,
        target=target,
        cost=cost,
        original_dim=be.original_dim,
    )
    _verify_encoding(out)
    return out


@dataclass(frozen=True)
class ControlledSimUnitary:
    """Indexed evolution: sum_m |m><m| (x) exp(i*m*gamma*H) over signed m.

    The index register holds ``j_bits + 1`` qubits in two's complement;
    register value r maps to m = r for r < big_m and m = r - 2*big_m
    otherwise.
    """

    unitary: DenseUnitary
    gamma: float
    big_m: int
    epsilon: float
    j_bits: int
    block_dim: int
    cost: dict = field(default_factory=dict)

    def block(self, m: int) -> np.ndarray:
        if not (-self.big_m <= m <= self.big_m - 1):
            raise ValueError(f"index {m} outside [-{self.big_m}, {self.big_m - 1}]")
        r = m if m >= 0 else m + 2 * self.big_m
        s0 = r * self.block_dim
        return self.unitary.matrix[s0 : s0 + self.block_dim, s0 : s0 + self.block_dim]


def be_controlled_sim(
    be: BlockEncoding, big_m: int, gamma: float, eps: float
) -> ControlledSimUnitary:
    """Assemble the controlled evolution of an encoded Hermitian operator.

    Non-Hermitian encodings are routed through the Hermitian dilation first.
    The certified error is the encoded-block deviation amplified by the
    largest evolution time, plus numerical residual.
    """
    if not _is_power_of_two(big_m):
        raise ValueError("big_m must be a power of two")
    if hermiticity_defect(be.target) > 1e-8:
        be = be_hermitian_dilation(be)
    h_enc = hermitize(be_extract(be))
    h_claim = hermitize(be.target)
    delta = spectral_norm(h_enc - h_claim)

    w, v = np.linalg.eigh(h_enc)
    dim = h_enc.shape[0]
    n_index = 2 * big_m
    total = n_index * dim
    big = np.zeros((total, total), dtype=complex)
    for r in range(n_index):
        m = r if r < big_m else r - 2 * big_m
        blk = (v * np.exp(1j * m * gamma * w)) @ v.conj().T
        s0 = r * dim
        big[s0 : s0 + dim, s0 : s0 + dim] = blk

    epsilon = delta * big_m * abs(gamma) + 1e-12
    cost = resources.CostLog(be.cost).merged(
        {"controlled_sim_queries": resources.controlled_sim_cost(be.alpha, big_m, gamma, max(eps, 1e-12))}
    )
    out = ControlledSimUnitary(
        unitary=DenseUnitary(big),
        gamma=float(gamma),
        big_m=int(big_m),
        epsilon=float(epsilon),
        j_bits=int(math.log2(big_m)),
        block_dim=dim,
        cost=cost,
    )
    for m in (-big_m, 0, 1, big_m - 1):
        measured = spectral_norm(out.block(m) - expm(1j * m * gamma * h_claim))
        if measured > epsilon + 1e-9:
            raise BlockEncodingError(
                f"controlled block at index {m} deviates by {measured:.3e} > {epsilon:.3e}"
            )
    return out
