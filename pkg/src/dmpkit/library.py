"""Libraries of learned models: interpolation across tasks and recognition.

A library entry pairs a trained model with the task-space query point it
was demonstrated at (for interpolation) and a label (for recognition).
Recognition works directly in weight space: a query demonstration is fitted
with the library's own settings and compared to each entry by the Pearson
correlation of the flattened weights, which ignores amplitude and offset
differences and keys on the shape of the forcing term.
"""

from dataclasses import dataclass, field

import numpy as np

from .basis import ForcingModel
from .discrete import DiscreteDmp, train_discrete
from .errors import (
    DimensionMismatch,
    InvalidArgument,
    LayoutMismatch,
    NoNeighbors,
    ZeroVariance,
)
from .trajectory import Demonstration


@dataclass(frozen=True)
class LibraryEntry:
    model: object
    query: np.ndarray
    label: str

    def __post_init__(self):
        object.__setattr__(self, "query", np.atleast_1d(np.asarray(self.query, dtype=float)))


@dataclass
class ModelLibrary:
    """Ordered collection of entries sharing one kernel layout."""

    entries: list = field(default_factory=list)

    def add(self, model, query, label):
        entry = LibraryEntry(model=model, query=query, label=label)
        if self.entries:
            first = self.entries[0]
            if entry.model.forcing.layout.n != first.model.forcing.layout.n:
                raise LayoutMismatch("entries must share one kernel count")
            if entry.query.shape != first.query.shape:
                raise DimensionMismatch("query points must share one shape")
        self.entries.append(entry)
        return entry

    def __len__(self):
        return len(self.entries)

    def labels(self):
        return [e.label for e in self.entries]


def _flat_weights(model):
    if isinstance(model, ForcingModel):
        return model.weights.reshape(-1)
    return model.forcing.weights.reshape(-1)


def similarity(a, b):
    """Pearson correlation of two models' flattened weights."""
    wa, wb = _flat_weights(a), _flat_weights(b)
    if wa.size != wb.size:
        raise DimensionMismatch("weight vectors disagree in length")
    da, db = wa - wa.mean(), wb - wb.mean()
    na, nb = np.linalg.norm(da), np.linalg.norm(db)
    if na < 1e-300 or nb < 1e-300:
        raise ZeroVariance("constant weight vector has no correlation")
    return float(da @ db / (na * nb))


def interpolate_weights(library, query, d_max):
    """Blend entry weights by inverse distance in the query space.

    Entries at distance ``d_max`` or more are excluded; an exact query
    match returns that entry's weights unchanged.  Raises
    :class:`~dmpkit.errors.NoNeighbors` when nothing lies inside the
    radius.
    """
    if d_max <= 0.0:
        raise InvalidArgument("interpolation radius must be positive")
    if not library.entries:
        raise NoNeighbors("library is empty")
    query = np.atleast_1d(np.asarray(query, dtype=float))
    first = library.entries[0]
    if query.shape != first.query.shape:
        raise DimensionMismatch("query shape does not match the library")
    dists = np.array([float(np.linalg.norm(e.query - query)) for e in library.entries])
    for e, d in zip(library.entries, dists):
        if d == 0.0:
            mdl = e.model.forcing if not isinstance(e.model, ForcingModel) else e.model
            return ForcingModel(layout=mdl.layout, weights=mdl.weights.copy(), r=mdl.r)
    inside = dists < d_max
    if not np.any(inside):
        raise NoNeighbors("no library entry inside the interpolation radius")
    picked = [(e, d) for e, d, m in zip(library.entries, dists, inside) if m]
    base = _forcing(picked[0][0].model)
    for e, _ in picked[1:]:
        f = _forcing(e.model)
        if (f.layout.kind != base.layout.kind or f.layout.n != base.layout.n
                or not np.allclose(f.layout.centers, base.layout.centers)):
            raise LayoutMismatch("entries must share one kernel layout")
    inv = np.array([1.0 / d for _, d in picked])
    coef = inv / inv.sum()
    weights = sum(c * _forcing(e.model).weights for c, (e, _) in zip(coef, picked))
    r = float(sum(c * _forcing(e.model).r for c, (e, _) in zip(coef, picked)))
    return ForcingModel(layout=base.layout, weights=weights, r=r)


def _forcing(model):
    return model if isinstance(model, ForcingModel) else model.forcing


def classify(library, demo, n_kernels=None, **train_kwargs):
    """Label a query demonstration by its nearest library entry in weight space.

    The query is fitted with the library's kernel count and the first
    entry's formulation settings (overridable through keyword arguments),
    then compared to every entry by weight correlation.  Returns the
    winning label and the per-entry scores.
    """
    if not library.entries:
        raise NoNeighbors("library is empty")
    if not isinstance(demo, Demonstration):
        raise InvalidArgument("classify expects a demonstration")
    ref = library.entries[0].model
    if not isinstance(ref, DiscreteDmp):
        raise InvalidArgument("recognition currently covers point-to-point models")
    kwargs = dict(n_kernels=ref.forcing.layout.n if n_kernels is None else n_kernels,
                  alpha_z=ref.alpha_z, beta_z=ref.beta_z, variant=ref.variant)
    kwargs.update(train_kwargs)
    fitted = train_discrete(demo, **kwargs)
    scores = [(e.label, similarity(fitted, e.model)) for e in library.entries]
    best = max(scores, key=lambda pair: pair[1])
    return best[0], scores
