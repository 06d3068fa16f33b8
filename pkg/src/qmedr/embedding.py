"""Data-matrix construction for the four dimensionality-reduction variants.

Builds the similarity graph, its Laplacians, neighborhood-reconstruction
weights, and scatter matrices, then assembles the (S1, S2) pair for each
variant and preconditions both matrices into a bounded spectral window so
the exponential pipeline downstream has the conditioning it assumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import hermitian_eig, spectral_norm

VARIANTS = ("ELPP", "EUDP", "ENPE", "EDA")

# EDA ranks by largest exponential eigenvalues; the others minimize
VARIANT_DIRECTIONS = {"ELPP": "smallest", "EUDP": "smallest", "ENPE": "smallest", "EDA": "largest"}

DEFAULT_KAPPA = 10.0


@dataclass(frozen=True)
class Dataset:
    """Sample matrix with one row per sample, plus cached row norms."""

    X: np.ndarray
    labels: np.ndarray | None = None
    row_norms: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        x = np.asarray(self.X, dtype=float)
        if x.ndim != 2:
            raise ValueError("X must be 2-D (samples by features)")
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError("need at least 1 sample and 1 feature")
        if not np.all(np.isfinite(x)):
            raise ValueError("X contains non-finite entries")
        object.__setattr__(self, "X", x)
        object.__setattr__(self, "row_norms", np.linalg.norm(x, axis=1))
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=int)
            if lab.shape != (x.shape[0],):
                raise ValueError("labels must have one entry per sample")
            object.__setattr__(self, "labels", lab)

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def normalized_rows(self) -> np.ndarray:
        norms = np.where(self.row_norms > 0, self.row_norms, 1.0)
        return self.X / norms[:, None]


@dataclass(frozen=True)
class SimilarityGraph:
    """Heat-kernel similarity over mutual k-nearest neighbors.

    ``S`` is symmetric with zero diagonal and entries in [0, 1]; ``D`` is the
    degree diagonal and ``L = D - S`` the (PSD) Laplacian.
    """

    S: np.ndarray
    D: np.ndarray
    L: np.ndarray
    k: int
    sigma: float
    flags: tuple = ()


@dataclass(frozen=True)
class AffineSpectralMap:
    """The map ``A -> (A + shift*I) / scale`` applied during preconditioning."""

    shift: float
    scale: float

    def apply(self, a: np.ndarray) -> np.ndarray:
        return (a + self.shift * np.eye(a.shape[0])) / self.scale

    def to_dict(self) -> dict:
        return {"shift": self.shift, "scale": self.scale}


@dataclass(frozen=True)
class MedrProblem:
    """Preconditioned (S1, S2) pair for one algorithm variant.

    Both matrices are symmetric with spectra inside [1/kappa, 1]; ``maps``
    records the affine spectral transforms that were applied, so consumers
    know the solved problem is the preconditioned one.
    """

    variant: str
    s1: np.ndarray
    s2: np.ndarray
    kappa1: float
    kappa2: float
    maps: tuple[AffineSpectralMap, AffineSpectralMap]
    flags: tuple = ()

    @property
    def dim(self) -> int:
        return self.s1.shape[0]


def pairwise_sq_distances(x: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def knn_graph(ds: Dataset, k: int, sigma: float | None = None) -> SimilarityGraph:
    """Mutual-or k-nearest-neighbor graph with heat-kernel weights.

    ``sigma=None`` selects the median pairwise distance. Equidistant neighbor
    ties keep the lower sample index.
    """
    n = ds.n_samples
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < N, got k={k}, N={n}")
    d2 = pairwise_sq_distances(ds.X)
    dist = np.sqrt(np.maximum(d2, 0.0))
    if sigma is None:
        upper = dist[np.triu_indices(n, 1)]
        sigma = float(np.median(upper))
        if sigma <= 0.0:
            raise ValueError("auto sigma is zero: dataset has too many duplicate samples")
    elif sigma <= 0:
        raise ValueError("sigma must be positive")

    d2_self = d2 + np.diag(np.full(n, np.inf))
    order = np.argsort(d2_self, axis=1, kind="stable")
    neighbor = np.zeros((n, n), dtype=bool)
    rows = np.repeat(np.arange(n), k)
    neighbor[rows, order[:, :k].ravel()] = True
    mutual_or = neighbor | neighbor.T

    s = np.where(mutual_or, np.exp(-d2 / (2.0 * sigma**2)), 0.0)
    np.fill_diagonal(s, 0.0)
    degrees = s.sum(axis=1)
    d = np.diag(degrees)
    lap = d - s
    flags = ()
    if np.any(degrees <= 0):
        flags = ("disconnected_vertex",)
    return SimilarityGraph(S=s, D=d, L=lap, k=k, sigma=sigma, flags=flags)


def precondition(raw: np.ndarray, kappa_target: float = DEFAULT_KAPPA):
    """Shift-and-scale a symmetric matrix so its spectrum lies in [1/kappa, 1].

    PSD inputs use shift = s_max / (kappa - 1); indefinite inputs get the
    larger shift that also lifts the negative part into the window. Near-zero
    matrices map to the identity and are flagged degenerate.
    """
    if kappa_target <= 1.0:
        raise ValueError("kappa_target must exceed 1")
    sym = (raw + raw.T) / 2.0
    dim = sym.shape[0]
    spec = hermitian_eig(sym)
    lmin, lmax = float(spec.eigenvalues[0]), float(spec.eigenvalues[-1])
    smax = max(abs(lmin), abs(lmax))
    flags: list[str] = []
    if smax <= 1e-12:
        flags.append("degenerate_zero_matrix")
        amap = AffineSpectralMap(shift=1.0, scale=1.0)
        return amap.apply(sym), amap, tuple(flags)
    if lmin < -1e-12 * smax:
        flags.append("indefinite_raw_matrix")
    shift = max(smax, lmax - kappa_target * lmin) / (kappa_target - 1.0)
    scale = lmax + shift
    if scale <= 1e-12:
        flags.append("degenerate_negative_matrix")
        shift = abs(lmin) + 1.0
        scale = lmax + shift
    amap = AffineSpectralMap(shift=shift, scale=scale)
    out = amap.apply(sym)
    return (out + out.T) / 2.0, amap, tuple(flags)


def _pad_raw(raw: np.ndarray, pad_to: int, at_top: bool) -> np.ndarray:
    """Grow a symmetric matrix with decoupled directions at a window edge.

    ``at_top`` places the padding at the largest eigenvalue (so padded
    directions map to exactly 1 under preconditioning), otherwise at zero
    (mapping to exactly 1/kappa). The data block is untouched either way.
    """
    sym = (raw + raw.T) / 2.0
    dim = sym.shape[0]
    if pad_to <= dim:
        return sym
    value = float(hermitian_eig(sym).eigenvalues[-1]) if at_top else 0.0
    if value < 0:
        value = 0.0
    out = np.zeros((pad_to, pad_to))
    out[:dim, :dim] = sym
    out[dim:, dim:] = value * np.eye(pad_to - dim)
    return out


def _assemble(variant, s1_raw, s2_raw, kappa_target, extra_flags=(), pad_to=None):
    flags = list(extra_flags)
    if pad_to is not None and pad_to > s1_raw.shape[0]:
        # keep padded directions out of the selected extreme set: for
        # minimization variants they sit at the top of the exponential
        # spectrum, for maximization at the bottom
        smallest = VARIANT_DIRECTIONS.get(variant, "smallest") == "smallest"
        s1_raw = _pad_raw(s1_raw, pad_to, at_top=smallest)
        s2_raw = _pad_raw(s2_raw, pad_to, at_top=not smallest)
        flags.append(f"padded_to_{pad_to}")
    s1, map1, f1 = precondition(s1_raw, kappa_target)
    s2, map2, f2 = precondition(s2_raw, kappa_target)
    return MedrProblem(
        variant=variant,
        s1=s1,
        s2=s2,
        kappa1=kappa_target,
        kappa2=kappa_target,
        maps=(map1, map2),
        flags=tuple(flags) + f1 + f2,
    )


def build_elpp(ds: Dataset, graph: SimilarityGraph, kappa_target: float = DEFAULT_KAPPA,
               pad_to: int | None = None) -> MedrProblem:
    """Locality-preserving pair: S1 = X^T L X, S2 = X^T D X."""
    x = ds.X
    flags = list(graph.flags)
    if np.any(np.diag(graph.D) <= 0):
        flags.append("degenerate_degree_matrix")
    return _assemble("ELPP", x.T @ graph.L @ x, x.T @ graph.D @ x, kappa_target, flags, pad_to)


def complement_graph(graph: SimilarityGraph) -> SimilarityGraph:
    """Dissimilarity companion: S'_ij = 1 - S_ij off the diagonal."""
    n = graph.S.shape[0]
    s_c = 1.0 - graph.S
    np.fill_diagonal(s_c, 0.0)
    deg = s_c.sum(axis=1)
    d_c = np.diag(deg)
    flags = ()
    if np.all(np.abs(s_c) < 1e-15):
        flags = ("degenerate_complement_graph",)
    return SimilarityGraph(S=s_c, D=d_c, L=d_c - s_c, k=graph.k, sigma=graph.sigma, flags=flags)


def build_eudp(ds: Dataset, graph: SimilarityGraph, kappa_target: float = DEFAULT_KAPPA,
               pad_to: int | None = None) -> MedrProblem:
    """Discriminant-projection pair: S1 = X^T L X, S2 = X^T L' X over the complement graph."""
    x = ds.X
    comp = complement_graph(graph)
    flags = list(graph.flags) + list(comp.flags)
    return _assemble("EUDP", x.T @ graph.L @ x, x.T @ comp.L @ x, kappa_target, flags, pad_to)


def npe_weights(ds: Dataset, k: int) -> np.ndarray:
    """Row-stochastic neighborhood reconstruction weights.

    Each row solves the constrained least-squares reconstruction of a sample
    from its k nearest neighbors through the Tikhonov-regularized local Gram
    matrix; weights sum to one and vanish outside the neighborhood.
    """
    n = ds.n_samples
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < N, got k={k}, N={n}")
    d2 = pairwise_sq_distances(ds.X) + np.diag(np.full(n, np.inf))
    order = np.argsort(d2, axis=1, kind="stable")
    w = np.zeros((n, n))
    ones = np.ones(k)
    for i in range(n):
        nbrs = order[i, :k]
        diffs = ds.X[i] - ds.X[nbrs]
        gram = diffs @ diffs.T
        gram = gram + 1e-8 * np.trace(gram) * np.eye(k)
        try:
            sol = np.linalg.solve(gram, ones)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded by regularization
            raise AssertionError(f"singular local Gram matrix at sample {i}") from exc
        total = sol.sum()
        assert np.isfinite(total) and abs(total) > 0, f"degenerate reconstruction at sample {i}"
        w[i, nbrs] = sol / total
    return w


def build_enpe(ds: Dataset, weights: np.ndarray, kappa_target: float = DEFAULT_KAPPA,
               pad_to: int | None = None) -> MedrProblem:
    """Neighborhood-preserving pair: S1 = X^T W_sym X with W_sym = (W + W^T)/2, S2 = X^T X."""
    x = ds.X
    w_sym = (weights + weights.T) / 2.0
    return _assemble("ENPE", x.T @ w_sym @ x, x.T @ x, kappa_target, (), pad_to)


def scatter_matrices(ds: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Between-class and within-class scatter matrices, both normalized by N."""
    if ds.labels is None:
        raise ValueError("labels are required for scatter matrices")
    x, labels = ds.X, ds.labels
    n = ds.n_samples
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError("need at least 2 classes")
    mu = x.mean(axis=0)
    dim = ds.n_features
    s_b = np.zeros((dim, dim))
    s_w = np.zeros((dim, dim))
    for c in classes:
        xc = x[labels == c]
        mu_c = xc.mean(axis=0)
        dc = mu_c - mu
        s_b += xc.shape[0] * np.outer(dc, dc)
        centered = xc - mu_c
        s_w += centered.T @ centered
    return s_b / n, s_w / n


def build_eda(ds: Dataset, kappa_target: float = DEFAULT_KAPPA,
              pad_to: int | None = None) -> MedrProblem:
    """Discriminant-analysis pair: S1 = between-class, S2 = within-class scatter."""
    s_b, s_w = scatter_matrices(ds)
    flags = []
    if spectral_norm(s_b) <= 1e-12 and spectral_norm(s_w) <= 1e-12:
        flags.append("degenerate_identical_samples")
    return _assemble("EDA", s_b, s_w, kappa_target, flags, pad_to)


def make_problem(s1_raw: np.ndarray, s2_raw: np.ndarray, kappa_target: float = DEFAULT_KAPPA,
                 variant: str = "custom") -> MedrProblem:
    """Generic constructor for matrix pairs outside the four named variants."""
    return _assemble(variant, np.asarray(s1_raw, dtype=float), np.asarray(s2_raw, dtype=float), kappa_target)


def build_problem(ds: Dataset, variant: str, k: int, sigma: float | None = None,
                  kappa_target: float = DEFAULT_KAPPA, pad_to: int | None = None) -> MedrProblem:
    """Dispatch to the named variant builders."""
    if variant == "ELPP":
        return build_elpp(ds, knn_graph(ds, k, sigma), kappa_target, pad_to)
    if variant == "EUDP":
        return build_eudp(ds, knn_graph(ds, k, sigma), kappa_target, pad_to)
    if variant == "ENPE":
        return build_enpe(ds, npe_weights(ds, k), kappa_target, pad_to)
    if variant == "EDA":
        return build_eda(ds, kappa_target, pad_to)
    raise ValueError(f"unknown variant {variant!r}")


def spectrum_window_defect(mat: np.ndarray, kappa: float) -> float:
    """How far the spectrum of a symmetric matrix strays outside [1/kappa, 1]."""
    w = hermitian_eig(mat).eigenvalues
    return float(max(0.0, 1.0 / kappa - w[0], w[-1] - 1.0))
