"""Random embedding matrices and their basic calculus.

A sketch is a random matrix S in R^{l x d} with l <= d whose row span defines
a search subspace.  The supported ensembles:

* scaled Gaussian     -- entries i.i.d. N(0, 1/l); oblivious subspace
                         embedding in the sense of Johnson & Lindenstrauss.
* scaled sampling     -- one nonzero sqrt(d/l) per row at a uniformly random
                         column (randomized block coordinates).
* scaled Haar         -- sqrt(d/l) times a matrix with Haar-orthonormal rows.
* s-hashing           -- exactly s nonzeros +-1/sqrt(s) per column, rows
                         sampled without replacement (CountSketch for s=1).
* identity            -- S = I_d, recovering full-space methods.

All ensembles are stored dense; at the dimensions this package targets
(d <= a few thousand) sparse formats buy nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import derive_seed, generator

KINDS = ("gaussian", "sampling", "haar", "hashing", "identity")


@dataclass(frozen=True)
class Ensemble:
    """A sketching distribution; ``s`` is the per-column nonzero count for hashing."""

    kind: str
    s: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "hashing":
            if self.s is None or self.s < 1:
                raise ValueError("hashing ensemble needs a nonzero count s >= 1")
        elif self.s is not None:
            raise ValueError(f"ensemble {self.kind!r} takes no s parameter")

    def __str__(self) -> str:
        return self.kind if self.s is None else f"{self.kind}:{self.s}"


GAUSSIAN = Ensemble("gaussian")
SAMPLING = Ensemble("sampling")
HAAR = Ensemble("haar")
IDENTITY = Ensemble("identity")


def hashing(s: int) -> Ensemble:
    return Ensemble("hashing", s)


def parse_ensemble(text: str, hashing_s: int = 1) -> Ensemble:
    """Parse ``"gaussian"``, ``"hashing"``, ``"hashing:3"`` etc."""
    name, _, param = text.partition(":")
    if name == "hashing":
        return hashing(int(param) if param else hashing_s)
    if param:
        raise ValueError(f"ensemble {name!r} takes no parameter")
    return Ensemble(name)


@dataclass(frozen=True)
class SketchMatrix:
    """An l x d random embedding, immutable once drawn.

    ``seed`` records the draw's provenance; equal (ensemble, l, d, seed)
    reproduce bit-identical entries.
    """

    l: int
    d: int
    entries: np.ndarray
    ensemble: Ensemble
    seed: int

    def __post_init__(self) -> None:
        self.entries.setflags(write=False)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return sketch_vector(self, v)


def orthonormal_rows(rng: np.random.Generator, l: int, d: int) -> np.ndarray:
    """l x d matrix with Haar-distributed orthonormal rows (l <= d).

    QR of a Gaussian draw, with the R-diagonal sign fix that makes the Q
    factor Haar rather than merely orthonormal.
    """
    g = rng.standard_normal((d, l))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return (q * signs).T


def draw_sketch(ensemble: Ensemble, l: int, d: int, seed: int) -> SketchMatrix:
    """Draw an l x d sketching matrix from ``ensemble``.

    Raises ValueError unless 1 <= l <= d (identity additionally needs l == d,
    hashing needs s <= l).
    """
    if not 1 <= l <= d:
        raise ValueError(f"sketch dimensions need 1 <= l <= d, got l={l}, d={d}")
    rng = generator(seed)
    if ensemble.kind == "gaussian":
        entries = rng.standard_normal((l, d)) / np.sqrt(l)
    elif ensemble.kind == "sampling":
        entries = np.zeros((l, d))
        cols = rng.integers(0, d, size=l)
        entries[np.arange(l), cols] = np.sqrt(d / l)
    elif ensemble.kind == "haar":
        entries = np.sqrt(d / l) * orthonormal_rows(rng, l, d)
    elif ensemble.kind == "hashing":
        s = ensemble.s
        if s > l:
            raise ValueError(f"hashing needs s <= l, got s={s}, l={l}")
        # Sample s rows per column without replacement by ranking uniforms.
        keys = rng.random((d, l))
        rows = np.argsort(keys, axis=1)[:, :s]
        signs = 2.0 * rng.integers(0, 2, size=(d, s)) - 1.0
        entries = np.zeros((l, d))
        cols = np.repeat(np.arange(d), s)
        entries[rows.ravel(), cols] = signs.ravel() / np.sqrt(s)
    else:  # identity
        if l != d:
            raise ValueError(f"identity ensemble needs l == d, got l={l}, d={d}")
        entries = np.eye(d)
    return SketchMatrix(l=l, d=d, entries=entries, ensemble=ensemble, seed=seed)


def sketch_vector(S: SketchMatrix, v: np.ndarray) -> np.ndarray:
    """S @ v."""
    v = np.asarray(v, dtype=float)
    if v.shape != (S.d,):
        raise ValueError(f"expected a vector of dimension {S.d}, got shape {v.shape}")
    return S.entries @ v


def sketch_hessian(S, hvp) -> np.ndarray:
    """Project a Hessian into the sketch's row space: B = S H S^T.

    ``hvp`` maps a d-vector to H times that vector; only l such products are
    taken, one per sketch row.  The result is symmetrized as (B + B^T)/2 so
    roundoff asymmetry cannot leak into eigenvalue computations.
    """
    rows = S.entries
    hs = np.column_stack([np.asarray(hvp(r), dtype=float) for r in rows])
    b = rows @ hs
    return 0.5 * (b + b.T)


def numeric_rank(M: np.ndarray, rel_tol: float = 1e-10) -> int:
    """Number of eigenvalues of symmetric M above rel_tol * max(1, spectral radius).

    The default threshold sits well below the nonzero spectrum of the
    projected Hessians this package produces and well above accumulated
    roundoff.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    w = np.linalg.eigvalsh(M)
    if w.size == 0:
        return 0
    cutoff = rel_tol * max(1.0, float(np.abs(w).max()))
    return int(np.count_nonzero(np.abs(w) > cutoff))


def jl_sketch_dim(n_vectors: int, eps: float, delta: float) -> int:
    """Classical Johnson-Lindenstrauss sizing: ceil(8 eps^-2 ln(n/delta)).

    A Gaussian sketch with this many rows preserves the squared norms of
    ``n_vectors`` fixed vectors within (1 +- eps), with probability >= 1-delta.
    """
    return int(np.ceil(8.0 / eps**2 * np.log(n_vectors / delta)))


def embedding_trial(
    ensemble: Ensemble,
    l: int,
    d: int,
    vectors,
    eps: float,
    trials: int,
    seed: int,
) -> float:
    """Monte Carlo check of the (1 +- eps) norm-preservation event.

    Draws ``trials`` independent sketches and returns the fraction of draws
    under which every vector y satisfies
    (1-eps)||y||^2 <= ||Sy||^2 <= (1+eps)||y||^2.
    Deterministic given ``seed``.
    """
    vectors = [np.asarray(v, dtype=float) for v in vectors]
    if not vectors:
        raise ValueError("need at least one vector to test")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    sq = [float(v @ v) for v in vectors]
    hits = 0
    for t in range(trials):
        S = draw_sketch(ensemble, l, d, derive_seed(seed, t))
        ok = True
        for v, n2 in zip(vectors, sq):
            sn2 = float(np.sum(sketch_vector(S, v) ** 2))
            if not (1.0 - eps) * n2 <= sn2 <= (1.0 + eps) * n2:
                ok = False
                break
        hits += ok
    return hits / trials
