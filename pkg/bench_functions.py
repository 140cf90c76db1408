# bench_functions.py
"""
Twelve BBOB-style noiseless test functions with shift-only instances.

Every function is evaluated as f_raw(x - shift) + f_opt with f_opt fixed to 0,
so the optimum of each instance sits exactly at its shift vector. Shifts are
drawn from a seeded PRNG keyed by (fid, iid, dim) and always lie in [-4, 4].
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from errors import ArgumentError, ConfigurationError

# Search box shared by every function, swarm and AOCC bound.
LOWER_BOUND = -5.0
UPPER_BOUND = 5.0

# Mixed into every instance seed so instance streams never collide with run seeds.
INSTANCE_SALT = 0x5EED_B0B0

SHIFT_RADIUS = 4.0
GALLAGHER_PEAKS = 21


class ModalClass(str, Enum):
    UNIMODAL = "Unimodal"
    MULTIMODAL = "Multimodal"
    HIGHLY_MULTIMODAL = "HighlyMultimodal"


_MODAL_CLASSES: Dict[int, ModalClass] = {
    1: ModalClass.UNIMODAL,
    2: ModalClass.UNIMODAL,
    5: ModalClass.UNIMODAL,
    6: ModalClass.UNIMODAL,
    8: ModalClass.UNIMODAL,
    9: ModalClass.UNIMODAL,
    12: ModalClass.UNIMODAL,
    3: ModalClass.MULTIMODAL,
    4: ModalClass.MULTIMODAL,
    15: ModalClass.MULTIMODAL,
    17: ModalClass.HIGHLY_MULTIMODAL,
    21: ModalClass.HIGHLY_MULTIMODAL,
}

SUPPORTED_FIDS: Tuple[int, ...] = tuple(sorted(_MODAL_CLASSES))

FUNCTION_NAMES: Dict[int, str] = {
    1: "Sphere",
    2: "Ellipsoidal",
    3: "Rastrigin",
    4: "Bueche-Rastrigin",
    5: "Linear Slope",
    6: "Attractive Sector",
    8: "Rosenbrock",
    9: "Rosenbrock (rotated)",
    12: "Bent Cigar",
    15: "Rastrigin (non-separable)",
    17: "Schaffers F7",
    21: "Gallagher 21 Peaks",
}


@dataclass(frozen=True)
class ProblemId:
    fid: int

    def __post_init__(self):
        try:
            fid = int(self.fid)
        except (TypeError, ValueError):
            fid = None
        if isinstance(self.fid, bool) or fid != self.fid or fid not in _MODAL_CLASSES:
            raise ConfigurationError(f"unsupported function id: {self.fid!r}")
        object.__setattr__(self, "fid", fid)

    @property
    def name(self) -> str:
        return FUNCTION_NAMES[self.fid]


def _as_problem_id(pid) -> ProblemId:
    return pid if isinstance(pid, ProblemId) else ProblemId(pid)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    pid: ProblemId
    dim: int
    iid: int
    shift: np.ndarray
    f_opt: float = 0.0
    # f21 only: (peak positions, peak weights, per-peak diagonal conditioning)
    peaks: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = field(default=None, repr=False)

    @property
    def fid(self) -> int:
        return self.pid.fid


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


def _cond_exponents(dim: int, scale: float) -> np.ndarray:
    """scale * i / (dim - 1) for i in 0..dim-1, with the one-dimensional case pinned to scale."""
    if dim == 1:
        return np.array([scale])
    return scale * np.arange(dim) / (dim - 1)


def _gallagher_peaks(rng: np.random.Generator, shift: np.ndarray):
    dim = shift.shape[0]
    n_local = GALLAGHER_PEAKS - 1

    weights = np.empty(GALLAGHER_PEAKS)
    weights[0] = 10.0
    weights[1:] = 1.1 + 8.0 * np.arange(n_local) / (n_local - 1)

    alphas = np.empty(GALLAGHER_PEAKS)
    alphas[0] = 1000.0
    alphas[1:] = rng.permutation(np.power(1000.0, 2.0 * np.arange(n_local) / (n_local - 1)))

    cond = np.empty((GALLAGHER_PEAKS, dim))
    for j, alpha in enumerate(alphas):
        diag = np.power(alpha, _cond_exponents(dim, 0.5)) / alpha ** 0.25
        cond[j] = diag if j == 0 else rng.permutation(diag)

    positions = np.empty((GALLAGHER_PEAKS, dim))
    positions[0] = shift
    positions[1:] = rng.uniform(LOWER_BOUND, UPPER_BOUND, size=(n_local, dim))
    return _frozen(positions), _frozen(weights), _frozen(cond)


def make_instance(pid, iid: int, dim: int) -> ProblemInstance:
    """Build the deterministic instance `iid` of function `pid` in `dim` dimensions."""
    pid = _as_problem_id(pid)
    if int(iid) < 1:
        raise ArgumentError(f"instance id must be >= 1, got {iid}")
    if int(dim) < 1:
        raise ArgumentError(f"dimension must be >= 1, got {dim}")
    iid, dim = int(iid), int(dim)

    rng = np.random.default_rng(np.random.SeedSequence([INSTANCE_SALT, pid.fid, iid, dim]))
    shift = rng.uniform(-SHIFT_RADIUS, SHIFT_RADIUS, size=dim)
    peaks = _gallagher_peaks(rng, shift) if pid.fid == 21 else None
    return ProblemInstance(pid=pid, dim=dim, iid=iid, shift=_frozen(shift), f_opt=0.0, peaks=peaks)


# ------------------------------
# Raw functions on shifted coordinates z = x - shift, rows are points
# ------------------------------
def _sphere(z, inst):
    return np.sum(z * z, axis=1)


def _ellipsoidal(z, inst):
    return np.sum(np.power(10.0, _cond_exponents(inst.dim, 6.0)) * z * z, axis=1)


def _rastrigin(z, inst):
    return 10.0 * inst.dim + np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z), axis=1)


def _bueche_rastrigin(z, inst):
    # skew-free: the per-coordinate scaling is kept, the odd-index boost is dropped
    return _rastrigin(np.power(10.0, _cond_exponents(inst.dim, 0.5)) * z, inst)


def _linear_slope(z, inst):
    direction = np.where(inst.shift >= 0.0, 1.0, -1.0)
    scale = np.power(10.0, _cond_exponents(inst.dim, 1.0))
    # flat (zero) once a coordinate passes the optimum in the slope direction
    return np.sum(scale * np.maximum(0.0, -direction * z), axis=1)


def _attractive_sector(z, inst):
    s = np.where(z * inst.shift > 0.0, 100.0, 1.0)
    return np.power(np.sum((s * z) ** 2, axis=1), 0.9)


def _rosenbrock(z, inst):
    y = max(1.0, np.sqrt(inst.dim) / 8.0) * z + 1.0
    if inst.dim == 1:
        return (y[:, 0] - 1.0) ** 2
    head, tail = y[:, :-1], y[:, 1:]
    return np.sum(100.0 * (head ** 2 - tail) ** 2 + (head - 1.0) ** 2, axis=1)


def _bent_cigar(z, inst):
    return z[:, 0] ** 2 + 1e6 * np.sum(z[:, 1:] ** 2, axis=1)


def _schaffers_f7(z, inst):
    if inst.dim == 1:
        s = np.abs(z)
    else:
        s = np.sqrt(z[:, :-1] ** 2 + z[:, 1:] ** 2)
    root = np.sqrt(s)
    terms = root + root * np.sin(50.0 * np.power(s, 0.2)) ** 2
    return np.mean(terms, axis=1) ** 2


def _gallagher(z, inst):
    positions, weights, cond = inst.peaks
    x = z + inst.shift
    diff = x[:, None, :] - positions[None, :, :]
    quad = np.sum(cond[None, :, :] * diff * diff, axis=2)
    best = np.max(weights[None, :] * np.exp(-quad / (2.0 * inst.dim)), axis=1)
    return (10.0 - best) ** 2


_RAW: Dict[int, Callable[[np.ndarray, ProblemInstance], np.ndarray]] = {
    1: _sphere,
    2: _ellipsoidal,
    3: _rastrigin,
    4: _bueche_rastrigin,
    5: _linear_slope,
    6: _attractive_sector,
    8: _rosenbrock,
    9: _rosenbrock,
    12: _bent_cigar,
    15: _rastrigin,
    17: _schaffers_f7,
    21: _gallagher,
}


def evaluate_batch(inst: ProblemInstance, points) -> np.ndarray:
    """Evaluate every row of an (m, dim) matrix; returns m objective values."""
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or x.shape[1] != inst.dim:
        raise ArgumentError(f"expected points of shape (m, {inst.dim}), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ArgumentError("non-finite input coordinates")
    z = x - inst.shift
    return _RAW[inst.fid](z, inst) + inst.f_opt


def evaluate(inst: ProblemInstance, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != inst.dim:
        raise ArgumentError(f"dimension mismatch: expected {inst.dim}, got {x.shape}")
    return float(evaluate_batch(inst, x[None, :])[0])


def modal_class(pid) -> ModalClass:
    return _MODAL_CLASSES[_as_problem_id(pid).fid]
