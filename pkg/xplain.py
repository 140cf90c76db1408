# xplain.py
"""
Explaining campaign results: configuration -> mean AOCC feature matrices, a
bagged regression-tree surrogate, and Shapley attributions of the seven
hyperparameters, computed two ways:

* exactly over a complete factorial grid (every coalition value is a group
  mean over the grid, 2**7 coalitions per sample), and
* by permutation sampling against the surrogate, with the grid itself as
  background data.
"""
import logging
from dataclasses import dataclass
from math import factorial
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from bench_functions import ModalClass, modal_class
from campaign import FEATURES, check_complete, records_frame
from errors import ArgumentError, DataIntegrityError, PreconditionError

logger = logging.getLogger("swarmx.xplain")

N_FEATURES = len(FEATURES)
ATTRIBUTION_COLUMNS = ["fid", "topology", "config_index", "feature", "feature_value", "shap_exact", "shap_surrogate"]
REPORT_COLUMNS = ["fid", "topology", "r2_train", "trees", "max_depth", "seed", "permutations"]


# ------------------------------
# Feature matrix
# ------------------------------
@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    features: pd.DataFrame  # index: config_index, columns: FEATURES
    target: pd.Series       # index: config_index, mean AOCC
    fid: Optional[int] = None
    topology: Optional[str] = None

    @property
    def X(self) -> np.ndarray:
        return self.features[list(FEATURES)].to_numpy(dtype=float)

    @property
    def y(self) -> np.ndarray:
        return self.target.to_numpy(dtype=float)

    def __len__(self):
        return len(self.target)

    def is_factorial(self) -> bool:
        levels = [self.features[c].nunique() for c in FEATURES]
        unique_rows = len(self.features.drop_duplicates())
        return unique_rows == len(self.features) and len(self.features) == int(np.prod(levels))


def build_feature_matrix(records, fid_filter=None, topology: str = None) -> FeatureMatrix:
    """
    Average AOCC per configuration over instances and runs.

    fid_filter=None averages over every function in the records (the
    all-function target); an int or a list restricts the slice.
    """
    df = records_frame(records)
    if topology is not None:
        df = df[df["topology"] == topology]
    if df["topology"].nunique() > 1:
        raise ArgumentError(f"records mix topologies {sorted(df['topology'].unique())}; pass topology=")
    # a config run for any function must be present for every function in the slice
    campaign_configs = sorted(df["config_index"].unique())
    if fid_filter is not None:
        wanted = [fid_filter] if np.isscalar(fid_filter) else list(fid_filter)
        df = df[df["fid"].isin([int(f) for f in wanted])]
    if df.empty:
        raise DataIntegrityError(f"no records for fid={fid_filter!r}, topology={topology!r}")
    check_complete(df, campaign_configs)

    grouped = df.groupby("config_index", sort=True)
    features = grouped[list(FEATURES)].first().astype(float)
    if (grouped[list(FEATURES)].nunique() > 1).any(axis=None):
        raise DataIntegrityError("a config_index maps to more than one hyperparameter tuple")
    target = grouped["aocc"].mean().rename("aocc")
    fid = int(fid_filter) if fid_filter is not None and np.isscalar(fid_filter) else None
    return FeatureMatrix(features=features, target=target, fid=fid, topology=str(df["topology"].iloc[0]))


# ------------------------------
# Surrogate: bagged regression trees
# ------------------------------
class RegressionTree:
    """Axis-aligned variance-reduction tree stored as flat node arrays; leaves have feature -1."""

    def __init__(self, max_depth: int = 8):
        self.max_depth = max_depth
        self.feature: np.ndarray = None
        self.threshold: np.ndarray = None
        self.left: np.ndarray = None
        self.right: np.ndarray = None
        self.value: np.ndarray = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RegressionTree":
        feature, threshold, left, right, value = [], [], [], [], []

        def grow(idx: np.ndarray, depth: int) -> int:
            node = len(feature)
            ys = y[idx]
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(float(np.mean(ys)))
            if depth >= self.max_depth or len(idx) < 2 or np.ptp(ys) == 0.0:
                return node
            split = self._best_split(X[idx], ys)
            if split is None:
                return node
            f, t = split
            go_left = X[idx, f] <= t
            feature[node], threshold[node] = f, t
            left[node] = grow(idx[go_left], depth + 1)
            right[node] = grow(idx[~go_left], depth + 1)
            return node

        grow(np.arange(len(y)), 0)
        self.feature = np.asarray(feature, dtype=int)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=int)
        self.right = np.asarray(right, dtype=int)
        self.value = np.asarray(value, dtype=float)
        return self

    @staticmethod
    def _best_split(X: np.ndarray, y: np.ndarray):
        n = len(y)
        parent_sse = float(np.sum((y - y.mean()) ** 2))
        best_sse, best = parent_sse, None
        for f in range(X.shape[1]):
            order = np.argsort(X[:, f], kind="stable")
            xs, ys = X[order, f], y[order]
            valid = np.flatnonzero(xs[:-1] < xs[1:])
            if valid.size == 0:
                continue
            csum, csq = np.cumsum(ys), np.cumsum(ys * ys)
            n_left = valid + 1.0
            n_right = n - n_left
            sum_left, sq_left = csum[valid], csq[valid]
            sum_right, sq_right = csum[-1] - sum_left, csq[-1] - sq_left
            sse = (sq_left - sum_left ** 2 / n_left) + (sq_right - sum_right ** 2 / n_right)
            j = int(np.argmin(sse))
            if sse[j] < best_sse - 1e-15:
                best_sse = float(sse[j])
                pos = valid[j]
                best = (f, 0.5 * (xs[pos] + xs[pos + 1]))
        return best

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=int)
        rows = np.arange(X.shape[0])
        for _ in range(self.max_depth + 1):
            f = self.feature[node]
            internal = f >= 0
            if not internal.any():
                break
            go_left = X[rows, np.where(internal, f, 0)] <= self.threshold[node]
            node = np.where(internal, np.where(go_left, self.left[node], self.right[node]), node)
        return self.value[node]


@dataclass(eq=False)
class SurrogateModel:
    trees: List[RegressionTree]
    n_trees: int
    max_depth: int
    seed: int
    r2_train: float = float("nan")

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.mean([tree.predict(X) for tree in self.trees], axis=0)


def r2_score(y: np.ndarray, predicted: np.ndarray) -> float:
    """1 - SSE/SST, defined as 1 for a zero-variance target."""
    if np.ptp(y) == 0.0:
        return 1.0
    sst = float(np.sum((y - np.mean(y)) ** 2))
    sse = float(np.sum((y - predicted) ** 2))
    return 1.0 - sse / sst


def fit_surrogate(fm: FeatureMatrix, trees: int = 100, max_depth: int = 8, seed: int = 0) -> SurrogateModel:
    if len(fm) == 0:
        raise ArgumentError("cannot fit a surrogate on an empty feature matrix")
    if trees < 1 or max_depth < 1:
        raise ArgumentError(f"trees and max_depth must be >= 1, got {trees}, {max_depth}")
    X, y = fm.X, fm.y
    m = len(y)
    fitted = []
    for t in range(trees):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), t]))
        sample = rng.integers(0, m, size=m)
        fitted.append(RegressionTree(max_depth).fit(X[sample], y[sample]))
    model = SurrogateModel(trees=fitted, n_trees=trees, max_depth=max_depth, seed=int(seed))
    model.r2_train = r2_score(y, model.predict(X))
    logger.info("surrogate fid=%s topology=%s: %d trees, depth %d, R2 train %.4f",
                fm.fid, fm.topology, trees, max_depth, model.r2_train)
    return model


# ------------------------------
# Shapley values
# ------------------------------
@dataclass(frozen=True)
class Attribution:
    sample_index: int
    config_index: int
    feature: str
    feature_value: float
    shap_value: float


def _shapley_weights() -> np.ndarray:
    """Weight |S|! (F-|S|-1)! / F! indexed by coalition size."""
    f = N_FEATURES
    return np.array([factorial(s) * factorial(f - s - 1) / factorial(f) for s in range(f)])


_WEIGHTS = _shapley_weights()
_MASKS = np.arange(1 << N_FEATURES)
_SIZES = np.array([bin(m).count("1") for m in _MASKS])


def coalition_table(X: np.ndarray, values: np.ndarray) -> np.ndarray:
    """
    (m, 2**F) matrix: entry [j, S] is the mean of `values` over rows agreeing with
    row j on the features in bitmask S. Over a complete factorial grid this is the
    interventional value of coalition S for sample j.
    """
    frame = pd.DataFrame(X, columns=list(FEATURES))
    frame["value"] = np.asarray(values, dtype=float)
    table = np.empty((len(frame), len(_MASKS)))
    table[:, 0] = frame["value"].mean()
    for mask in _MASKS[1:]:
        cols = [FEATURES[i] for i in range(N_FEATURES) if mask >> i & 1]
        table[:, mask] = frame.groupby(cols, sort=False)["value"].transform("mean").to_numpy()
    return table


def _exact_from_table(table: np.ndarray) -> np.ndarray:
    phi = np.zeros((table.shape[0], N_FEATURES))
    for i in range(N_FEATURES):
        bit = 1 << i
        without = _MASKS[(_MASKS & bit) == 0]
        weights = _WEIGHTS[_SIZES[without]]
        phi[:, i] = (table[:, without | bit] - table[:, without]) @ weights
    return phi


def _require_factorial(fm: FeatureMatrix):
    if not fm.is_factorial():
        raise PreconditionError("grid incomplete: exact Shapley values need a complete factorial feature matrix")


def shapley_exact_all(fm: FeatureMatrix) -> np.ndarray:
    """Exact Shapley values for every sample, shape (len(fm), 7)."""
    _require_factorial(fm)
    return _exact_from_table(coalition_table(fm.X, fm.y))


def _attributions(fm: FeatureMatrix, sample_index: int, phi: np.ndarray) -> List[Attribution]:
    config_index = int(fm.features.index[sample_index])
    row = fm.X[sample_index]
    return [
        Attribution(sample_index, config_index, name, float(row[i]), float(phi[i]))
        for i, name in enumerate(FEATURES)
    ]


def _check_sample(fm: FeatureMatrix, sample_index: int):
    if not 0 <= sample_index < len(fm):
        raise ArgumentError(f"sample_index {sample_index} outside 0..{len(fm) - 1}")


def shapley_exact_grid(fm: FeatureMatrix, sample_index: int) -> List[Attribution]:
    _check_sample(fm, sample_index)
    _require_factorial(fm)
    table = coalition_table(fm.X, fm.y)
    return _attributions(fm, sample_index, _exact_from_table(table[sample_index:sample_index + 1])[0])


class _CoalitionValues:
    """v(S) of the surrogate for one sample, background = the feature matrix rows."""

    def __init__(self, model: SurrogateModel, fm: FeatureMatrix):
        self.model = model
        self.X = fm.X
        self.table = coalition_table(self.X, model.predict(self.X)) if fm.is_factorial() else None
        self._cache: Dict = {}

    def row(self, sample_index: int) -> np.ndarray:
        if self.table is not None:
            return self.table[sample_index]
        # generic background: substitute the sample's coalition values into every row
        key = sample_index
        if key not in self._cache:
            x = self.X[sample_index]
            values = np.empty(len(_MASKS))
            for mask in _MASKS:
                background = self.X.copy()
                cols = [i for i in range(N_FEATURES) if mask >> i & 1]
                background[:, cols] = x[cols]
                values[mask] = float(np.mean(self.model.predict(background)))
            self._cache[key] = values
        return self._cache[key]


def _permutation_phi(values: np.ndarray, permutations: int, seed: int, sample_index: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(sample_index)]))
    perms = np.argsort(rng.random((permutations, N_FEATURES)), axis=1)
    bits = np.left_shift(1, perms)
    after = np.cumsum(bits, axis=1)
    before = after - bits
    phi = np.zeros(N_FEATURES)
    np.add.at(phi, perms, values[after] - values[before])
    return phi / permutations


def shapley_surrogate(
    model: SurrogateModel,
    fm: FeatureMatrix,
    sample_index: int,
    permutations: int = 256,
    seed: int = 0,
    _values: _CoalitionValues = None,
) -> List[Attribution]:
    """Permutation-sampling Shapley estimate of the surrogate prediction for one sample."""
    if permutations < 1:
        raise ArgumentError(f"permutations must be >= 1, got {permutations}")
    _check_sample(fm, sample_index)
    values = _values or _CoalitionValues(model, fm)
    phi = _permutation_phi(values.row(sample_index), permutations, seed, sample_index)
    return _attributions(fm, sample_index, phi)


def shapley_surrogate_all(model: SurrogateModel, fm: FeatureMatrix, permutations: int = 256, seed: int = 0) -> np.ndarray:
    if permutations < 1:
        raise ArgumentError(f"permutations must be >= 1, got {permutations}")
    values = _CoalitionValues(model, fm)
    logger.info("surrogate Shapley fid=%s topology=%s: %d samples, %d permutations each, seed %d",
                fm.fid if fm.fid is not None else "all", fm.topology, len(fm), permutations, seed)
    return np.vstack([
        _permutation_phi(values.row(j), permutations, seed, j) for j in range(len(fm))
    ])


# ------------------------------
# Output tables
# ------------------------------
def attribution_table(fm: FeatureMatrix, exact: np.ndarray = None, surrogate: np.ndarray = None,
                      fid_label=None) -> pd.DataFrame:
    """Long-format attribution rows, one per (config, feature), in grid then feature order."""
    m = len(fm)
    empty = np.full((m, N_FEATURES), np.nan)
    exact = empty if exact is None else exact
    surrogate = empty if surrogate is None else surrogate
    table = pd.DataFrame({
        "fid": fid_label if fid_label is not None else (fm.fid if fm.fid is not None else "all"),
        "topology": fm.topology,
        "config_index": np.repeat(fm.features.index.to_numpy(), N_FEATURES),
        "feature": np.tile(FEATURES, m),
        "feature_value": fm.X.reshape(-1),
        "shap_exact": exact.reshape(-1),
        "shap_surrogate": surrogate.reshape(-1),
    })
    return table[ATTRIBUTION_COLUMNS]


def surrogate_report(model: SurrogateModel, fm: FeatureMatrix, fid_label=None,
                     permutations: Optional[int] = None) -> pd.DataFrame:
    """One-row fit summary; permutations is empty when no surrogate Shapley values were sampled."""
    return pd.DataFrame([{
        "fid": fid_label if fid_label is not None else (fm.fid if fm.fid is not None else "all"),
        "topology": fm.topology,
        "r2_train": model.r2_train,
        "trees": model.n_trees,
        "max_depth": model.max_depth,
        "seed": model.seed,
        "permutations": permutations,
    }], columns=REPORT_COLUMNS)


def _as_attribution_frame(attributions) -> pd.DataFrame:
    if isinstance(attributions, pd.DataFrame):
        frame = attributions.copy()
        if "shap_value" not in frame.columns:
            source = "shap_exact" if frame["shap_exact"].notna().any() else "shap_surrogate"
            frame["shap_value"] = frame[source]
        return frame
    return pd.DataFrame([a.__dict__ for a in attributions])


def swarm_plot_data(attributions, fm: FeatureMatrix = None) -> pd.DataFrame:
    """
    Rows (feature, shap_value, normalized_feature_value) ordered by mean |shap| per
    feature, largest first. Feature values are rescaled to [0, 1] over the feature
    matrix (or the attributions themselves); a single-valued feature maps to 0.5.
    """
    frame = _as_attribution_frame(attributions)
    columns = ["feature", "shap_value", "normalized_feature_value"]
    if frame.empty:
        return pd.DataFrame(columns=columns)

    if fm is not None:
        lo = fm.features.min()
        hi = fm.features.max()
    else:
        lo = frame.groupby("feature")["feature_value"].min()
        hi = frame.groupby("feature")["feature_value"].max()
    span = (frame["feature"].map(hi) - frame["feature"].map(lo)).to_numpy(dtype=float)
    offset = (frame["feature_value"] - frame["feature"].map(lo)).to_numpy(dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        normalized = np.where(span > 0, offset / np.where(span > 0, span, 1.0), 0.5)
    frame["normalized_feature_value"] = normalized

    known = [f for f in FEATURES if f in set(frame["feature"])]
    extra = sorted(set(frame["feature"]) - set(known))
    base_order = known + extra
    strength = frame.assign(abs_shap=frame["shap_value"].abs()).groupby("feature")["abs_shap"].mean()
    order = sorted(base_order, key=lambda f: (-strength[f], base_order.index(f)))
    frame["_rank"] = frame["feature"].map({f: i for i, f in enumerate(order)})
    frame = frame.sort_values("_rank", kind="stable")
    return frame[columns].reset_index(drop=True)


def feature_importance(attributions: pd.DataFrame, value_column: str = "shap_exact") -> pd.DataFrame:
    """Mean |shap| per (fid, topology, feature)."""
    frame = attributions.assign(mean_abs_shap=attributions[value_column].abs())
    return frame.groupby(["fid", "topology", "feature"], sort=True)["mean_abs_shap"].mean().reset_index()


def modal_class_importance(attributions: pd.DataFrame, value_column: str = "shap_exact") -> pd.DataFrame:
    """Mean |shap| per (modal class, topology, feature); all-function rows are skipped."""
    per_function = attributions[pd.to_numeric(attributions["fid"], errors="coerce").notna()].copy()
    if per_function.empty:
        return pd.DataFrame(columns=["modal_class", "topology", "feature", "mean_abs_shap"])
    per_function["modal_class"] = per_function["fid"].astype(int).map(lambda f: modal_class(f).value)
    per_function["mean_abs_shap"] = per_function[value_column].abs()
    class_order = {c.value: i for i, c in enumerate(ModalClass)}
    out = per_function.groupby(["modal_class", "topology", "feature"])["mean_abs_shap"].mean().reset_index()
    out["_c"] = out["modal_class"].map(class_order)
    out["_f"] = out["feature"].map({f: i for i, f in enumerate(FEATURES)})
    return out.sort_values(["_c", "topology", "_f"]).drop(columns=["_c", "_f"]).reset_index(drop=True)
