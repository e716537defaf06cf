"""Feature preprocessing, the published 2D projections, and footprint
metrics over the projected space.

Two projection models ship with the package: the problem-type space (12
problem-type features) and the instance space (12 mixed features). Their
weight matrices are bundled digit-for-digit as published; the training
normalization statistics behind them were never published, so the bundled
models apply the weights to already-normalized vectors and fitting
statistics on your own training data is required for absolute coordinates.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .features import FeatureVector


class MissingFeatureError(KeyError):
    pass


@dataclass(frozen=True)
class NormalizationStats:
    """Training statistics: per-feature min, max, and mean of the min-max
    scaled value."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]
    means: tuple[float, ...]


@dataclass(frozen=True)
class ProjectionModel:
    """Feature list, optional normalization statistics, and a 2 x k weight
    matrix mapping a preprocessed vector to (z1, z2)."""

    name: str
    feature_names: tuple[str, ...]
    weights: tuple[tuple[float, ...], tuple[float, ...]]
    stats: NormalizationStats | None = None

    def __post_init__(self):
        k = len(self.feature_names)
        if any(len(row) != k for row in self.weights):
            raise ValueError("weight rows must match feature_names length")
        if self.stats is not None and any(
            lo > hi for lo, hi in zip(self.stats.mins, self.stats.maxs)
        ):
            raise ValueError("stats mins must be <= maxs")

    def with_stats(self, stats: NormalizationStats) -> "ProjectionModel":
        return ProjectionModel(self.name, self.feature_names, self.weights, stats)

    def to_json(self) -> str:
        payload = {
            "name": self.name,
            "feature_names": list(self.feature_names),
            "weights": [list(row) for row in self.weights],
            "stats": None
            if self.stats is None
            else {
                "mins": list(self.stats.mins),
                "maxs": list(self.stats.maxs),
                "means": list(self.stats.means),
            },
        }
        return json.dumps(payload, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ProjectionModel":
        payload = json.loads(text)
        stats = payload.get("stats")
        return cls(
            name=payload.get("name", "custom"),
            feature_names=tuple(payload["feature_names"]),
            weights=tuple(tuple(row) for row in payload["weights"]),
            stats=None
            if stats is None
            else NormalizationStats(
                tuple(stats["mins"]), tuple(stats["maxs"]), tuple(stats["means"])
            ),
        )


def _vector(fv: FeatureVector, names: tuple[str, ...]) -> np.ndarray:
    try:
        return np.array([fv[name] for name in names], dtype=float)
    except KeyError as exc:
        raise MissingFeatureError(f"feature {exc.args[0]!r} missing from vector") from exc


def preprocess(fv: FeatureVector, model: ProjectionModel) -> np.ndarray:
    """Min-max scale then mean-centre a feature vector with the model's
    training statistics; features with a degenerate range map to 0.

    Models without statistics (the bundled published ones) return the raw
    values, i.e. the input is taken as already normalized.
    """
    raw = _vector(fv, model.feature_names)
    if model.stats is None:
        return raw
    mins = np.array(model.stats.mins)
    maxs = np.array(model.stats.maxs)
    means = np.array(model.stats.means)
    span = maxs - mins
    scaled = np.where(span > 0, (raw - mins) / np.where(span > 0, span, 1.0), 0.0)
    return scaled - np.where(span > 0, means, 0.0)


def project(fv: FeatureVector, model: ProjectionModel) -> tuple[float, float]:
    """(z1, z2) = weights . preprocess(fv)."""
    normalized = preprocess(fv, model)
    w = np.array(model.weights)
    z = w @ normalized
    return float(z[0]), float(z[1])


def fit_normalization(
    training: list[FeatureVector], names: tuple[str, ...] | list[str]
) -> NormalizationStats:
    """Compute min/max/scaled-mean statistics over training vectors only.

    Degenerate (constant) features are flagged with a warning; they
    preprocess to 0.
    """
    if not training:
        raise ValueError("empty training set")
    names = tuple(names)
    data = np.array([_vector(fv, names) for fv in training])
    mins = data.min(axis=0)
    maxs = data.max(axis=0)
    span = maxs - mins
    for i, name in enumerate(names):
        if span[i] == 0:
            warnings.warn(f"feature {name!r} is constant over the training set")
    scaled = np.where(span > 0, (data - mins) / np.where(span > 0, span, 1.0), 0.0)
    means = scaled.mean(axis=0)
    return NormalizationStats(
        mins=tuple(float(v) for v in mins),
        maxs=tuple(float(v) for v in maxs),
        means=tuple(float(v) for v in means),
    )


# Published problem-type projection (12 features; matrix entries bundled
# digit-for-digit). Each pair is the (z1, z2) weight column of one feature.
_PROBLEM_TYPE_COLUMNS = (
    ("f_T", (-0.0859, 0.3822)),
    ("f_P", (-0.3676, -0.5381)),
    ("fS_CA1", (-0.4103, -0.2229)),
    ("fH_CA2", (0.4221, -0.1775)),
    ("fH_CA3", (0.4957, -0.1841)),
    ("fH_CA4", (0.2012, -0.6936)),
    ("fH_GA1", (-0.3357, 0.0449)),
    ("fS_GA1", (0.0908, 0.1941)),
    ("fH_BR2", (0.4566, -0.9567)),
    ("fS_BR2", (0.0404, 0.208)),
    ("fS_FA2", (0.2266, 0.2159)),
    ("fS_SE1", (-0.3634, -0.2149)),
)

# Published instance-space projection (12 mixed features).
_INSTANCE_COLUMNS = (
    ("f_T", (-0.2398, -0.1241)),
    ("fS_CA1", (0.1657, -0.1184)),
    ("fS_CA2", (0.2899, -0.3249)),
    ("fH_CA3", (0.4703, -0.0171)),
    ("fH_CA4", (0.2474, -0.1614)),
    ("fS_CA4", (-0.358, -0.2934)),
    ("fS_BR2", (-0.0997, 0.4328)),
    ("phi_ip_obj_mean", (0.5187, -0.1947)),
    ("phi_ip_cons_degree_max", (-0.2241, -0.1807)),
    ("phi_ip_lp_objective", (0.7985, 0.0181)),
    ("phi_sa_ca3", (-0.1027, -0.0802)),
    ("phi_sa_soft_cost_stage12", (0.471, -0.2456)),
)


def _bundled(name: str, columns) -> ProjectionModel:
    return ProjectionModel(
        name=name,
        feature_names=tuple(col[0] for col in columns),
        weights=(
            tuple(col[1][0] for col in columns),
            tuple(col[1][1] for col in columns),
        ),
    )


PROBLEM_TYPE_MODEL = _bundled("problem-type", _PROBLEM_TYPE_COLUMNS)
INSTANCE_MODEL = _bundled("instance", _INSTANCE_COLUMNS)

BUNDLED_MODELS = {
    "problem-type": PROBLEM_TYPE_MODEL,
    "instance": INSTANCE_MODEL,
}


def get_model(name: str) -> ProjectionModel:
    try:
        return BUNDLED_MODELS[name]
    except KeyError:
        raise KeyError(
            f"unknown bundled model {name!r}; choices: {sorted(BUNDLED_MODELS)}"
        ) from None


@dataclass
class Footprint:
    """Grid approximation of an algorithm's good-performance region.

    Cells are grid coordinates mapped to (total, good) point counts;
    footprint cells are the occupied cells whose good fraction reaches the
    purity threshold. Area is relative to the occupied region, density is
    points per unit footprint area, purity the good share inside.
    """

    cells: dict[tuple[int, int], tuple[int, int]]
    footprint_cells: frozenset[tuple[int, int]]
    area: float
    density: float
    purity: float
    bounds: tuple[float, float, float, float]
    grid_cells: int


def footprint(
    points: list[tuple[float, float, bool]],
    grid_cells: int = 30,
    purity_threshold: float = 0.55,
) -> Footprint:
    """Bin labelled 2D points on a grid and keep cells dominated by good
    performance."""
    if not points:
        raise ValueError("footprint needs at least one point")
    if grid_cells < 1:
        raise ValueError("grid_cells must be >= 1")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x_min, x_max = min(xs), max(xs)
    y_min, y_max = min(ys), max(ys)
    # degenerate extents collapse to a single unit-sized cell on that axis
    x_span = (x_max - x_min) or 1.0
    y_span = (y_max - y_min) or 1.0

    def cell_of(x: float, y: float) -> tuple[int, int]:
        cx = min(grid_cells - 1, int((x - x_min) / x_span * grid_cells))
        cy = min(grid_cells - 1, int((y - y_min) / y_span * grid_cells))
        return cx, cy

    cells: dict[tuple[int, int], tuple[int, int]] = {}
    for x, y, good in points:
        key = cell_of(x, y)
        total, ngood = cells.get(key, (0, 0))
        cells[key] = (total + 1, ngood + (1 if good else 0))

    selected = frozenset(
        key for key, (total, ngood) in cells.items() if ngood / total >= purity_threshold
    )
    cell_area = (x_span / grid_cells) * (y_span / grid_cells)
    in_fp = [(cells[key][0], cells[key][1]) for key in selected]
    points_in = sum(t for t, _ in in_fp)
    good_in = sum(g for _, g in in_fp)
    return Footprint(
        cells=cells,
        footprint_cells=selected,
        area=len(selected) / len(cells),
        density=points_in / (len(selected) * cell_area) if selected else 0.0,
        purity=good_in / points_in if points_in else 0.0,
        bounds=(x_min, x_max, y_min, y_max),
        grid_cells=grid_cells,
    )
