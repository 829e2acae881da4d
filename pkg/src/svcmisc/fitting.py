"""Per-individual identification of output-part parameters.

The objective is the squared-residual sum between observed and model MISC
over all conditions and observation instants. Only the output part is
fitted; the observer gains stay fixed, so the conflict trace of each
condition is integrated once and cached, and every candidate parameter
set only re-integrates the 2- or 4-state output filters.

Search: multi-start Nelder-Mead in a transformed space. Positive
parameters are log-transformed and beta2 is reparameterized as
beta1 * (1 + exp(q)) so beta1 < beta2 holds by construction; box bounds
on the raw parameters are enforced by a quadratic log-space penalty.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .errors import DataFormatError, ParticipantExcludedError
from .misc_output import OutputParams, OutputVariant
from .motion_data import MiscTrace, MotionTrace
from .simulator import _svc_pass
from .svc_observer import SvcParams

DEFAULT_BOUNDS: dict[str, tuple[float, float]] = {
    "beta1": (1.0, 600.0),
    "beta2": (60.0, 7200.0),
    "exponent": (0.1, 10.0),
    "b": (0.01, 10.0),
    "gain": (0.01, 1000.0),
    "tau_i": (10.0, 7200.0),
}

_PENALTY_WEIGHT = 1e4


@dataclass(frozen=True)
class ConditionData:
    """One experimental condition: motion input and observed MISC."""

    motion: MotionTrace
    observed: MiscTrace

    def __post_init__(self):
        t0, t1 = self.motion.t[0], self.motion.t[-1]
        if np.any(self.observed.t < t0) or np.any(self.observed.t > t1):
            raise DataFormatError("observation times outside motion span")


@dataclass(frozen=True)
class FitConfig:
    n_starts: int = 32
    max_iters: int = 2000
    rel_tol: float = 1e-8
    bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    rng_seed: int = 0
    dt_sim: float = 0.01
    # output-filter integration stride relative to dt_sim; the filters are
    # slow (beta1 >= 1 s) so a coarser RK4 step loses nothing measurable
    fit_stride: int = 4

    def __post_init__(self):
        if self.n_starts < 1:
            raise DataFormatError("n_starts must be >= 1")
        if self.fit_stride != 1 and self.fit_stride % 2 != 0:
            raise DataFormatError("fit_stride must be 1 or even")
        for name, (lo, hi) in self.bounds.items():
            if not (0 < lo < hi):
                raise DataFormatError(f"bounds for '{name}' must satisfy 0 < lo < hi")


@dataclass(frozen=True)
class StartDiagnostic:
    initial_params: OutputParams
    final_params: OutputParams
    J: float
    converged: bool
    n_evals: int


@dataclass(frozen=True)
class FitResult:
    variant: OutputVariant
    best_params: OutputParams
    J: float
    residuals: list  # per-condition arrays obs - pred
    predictions: list
    starts: list


def objective_j(conditions, predictions) -> float:
    """Sum of squared residuals over all conditions and instants."""
    if len(conditions) != len(predictions):
        raise DataFormatError("conditions and predictions length mismatch")
    total = 0.0
    for cond, pred in zip(conditions, predictions):
        obs = cond.observed.values
        pred = np.asarray(pred, dtype=float)
        if pred.shape != obs.shape:
            raise DataFormatError("prediction length mismatch")
        r = obs - pred
        total += float(np.dot(r, r))
    return total


def pearson_r(x, y) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DataFormatError("length mismatch")
    if x.size < 2:
        raise DataFormatError("need at least 2 samples")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.sqrt(np.dot(xc, xc))
    sy = np.sqrt(np.dot(yc, yc))
    if sx == 0.0 or sy == 0.0:
        raise DataFormatError("zero variance: correlation undefined")
    return float(np.dot(xc, yc) / (sx * sy))


def mean_abs_error(obs, pred) -> float:
    obs = np.asarray(obs, dtype=float)
    pred = np.asarray(pred, dtype=float)
    if obs.shape != pred.shape:
        raise DataFormatError("length mismatch")
    if obs.size < 1:
        raise DataFormatError("need at least 1 sample")
    return float(np.mean(np.abs(obs - pred)))


# ---------------------------------------------------------------------------
# parameter transform


def _param_names(variant: OutputVariant) -> tuple[str, ...]:
    return {
        OutputVariant.MSIBASE: ("b", "tau_i", "gain"),
        OutputVariant.OMAN_AP: ("beta1", "beta2", "exponent"),
        OutputVariant.OMAN_BP: ("beta1", "beta2", "exponent"),
        OutputVariant.OMAN_HILL: ("beta1", "beta2", "b", "gain"),
    }[variant]


def _encode(variant: OutputVariant, params: OutputParams) -> np.ndarray:
    vals = []
    for name in _param_names(variant):
        v = getattr(params, name)
        if name == "beta2":
            vals.append(np.log(v / params.beta1 - 1.0))
        else:
            vals.append(np.log(v))
    return np.array(vals)


def _decode(variant: OutputVariant, theta: np.ndarray) -> OutputParams:
    names = _param_names(variant)
    kwargs = {}
    for name, th in zip(names, theta):
        if name == "beta2":
            kwargs[name] = kwargs["beta1"] * (1.0 + np.exp(th))
        else:
            kwargs[name] = np.exp(th)
    return OutputParams(variant, **kwargs)


def _bound_penalty(params: OutputParams, bounds: dict) -> float:
    pen = 0.0
    for name in params.names():
        lo, hi = bounds.get(name, (None, None))
        if lo is None:
            continue
        v = getattr(params, name)
        if v < lo:
            pen += np.log(lo / v) ** 2
        elif v > hi:
            pen += np.log(v / hi) ** 2
    return _PENALTY_WEIGHT * pen


def _draw_start(
    variant: OutputVariant, bounds: dict, rng: np.random.Generator
) -> OutputParams:
    kwargs = {}
    for name in _param_names(variant):
        lo, hi = bounds[name]
        if name == "beta2":
            lo = max(lo, kwargs["beta1"] * 1.01)
            if lo >= hi:
                lo = kwargs["beta1"] * 1.01
                hi = lo * 10.0
        kwargs[name] = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
    return OutputParams(variant, **kwargs)


# ---------------------------------------------------------------------------
# fitting


class _CachedPredictor:
    """Per-condition conflict cache; predicts MISC for candidate params.

    The observer is integrated once per condition; candidates replay its
    per-stage conflict magnitudes through the scalar output kernels,
    sampling only at the observation grid indices.
    """

    def __init__(self, conditions, svc: SvcParams, dt_sim: float, stride: int = 1):
        self.conditions = conditions
        self.h = dt_sim * stride
        self.cache = []
        for cond in conditions:
            n, _, dv_vec, dv_stage = _svc_pass(cond.motion, svc, dt_sim)
            t0 = cond.motion.t[0]
            if stride > 1:
                # resample the conflict magnitude onto the coarse RK4 stage
                # grid (start, midpoint, midpoint, end of each coarse step)
                dvn = np.sqrt(np.sum(dv_vec * dv_vec, axis=1))
                nc = n // stride
                ds = np.empty((nc, 4))
                ds[:, 0] = dvn[0:nc * stride:stride]
                ds[:, 1] = dvn[stride // 2:nc * stride:stride]
                ds[:, 2] = ds[:, 1]
                ds[:, 3] = dvn[stride:nc * stride + 1:stride]
                dv_stage = ds
                n = nc
            obs_idx = np.clip(
                np.round((cond.observed.t - t0) / self.h).astype(np.int64), 0, n
            )
            self.cache.append((dv_stage, obs_idx))

    def predict(self, params: OutputParams) -> list[np.ndarray]:
        variant = params.variant
        if variant is OutputVariant.MSIBASE:
            mode, p_in = _kernels.INPUT_HILL, params.b
        elif variant is OutputVariant.OMAN_AP:
            mode, p_in = _kernels.INPUT_IDENTITY, 0.0
        elif variant is OutputVariant.OMAN_BP:
            mode, p_in = _kernels.INPUT_POWER, params.exponent
        else:
            mode, p_in = _kernels.INPUT_HILL, params.b
        preds = []
        for dv_stage, obs_idx in self.cache:
            out = np.empty(obs_idx.size)
            if variant is OutputVariant.MSIBASE:
                bad = _kernels.cascade2_fit(
                    dv_stage, mode, p_in, params.tau_i, self.h, obs_idx, out
                )
                out *= params.gain
            else:
                bad = _kernels.oman_fit(
                    dv_stage, mode, p_in, params.beta1, params.beta2,
                    self.h, obs_idx, out,
                )
                if variant is OutputVariant.OMAN_AP:
                    # u_o >= 0 up to rounding; clamp before the fractional power
                    out = np.maximum(out, 0.0) ** params.exponent
                elif variant is OutputVariant.OMAN_HILL:
                    out = params.gain * out
            if bad:
                raise ArithmeticError("output integration went non-finite")
            preds.append(out)
        return preds


def fit(
    variant: OutputVariant,
    conditions,
    svc: SvcParams = SvcParams(),
    cfg: FitConfig = FitConfig(),
) -> FitResult:
    """Multi-start Nelder-Mead fit of the output-part parameters.

    Deterministic for a fixed cfg.rng_seed. Raises
    ParticipantExcludedError when every observed MISC is zero.
    """
    conditions = list(conditions)
    if not conditions:
        raise DataFormatError("need at least one condition")
    if all(np.all(c.observed.values == 0) for c in conditions):
        raise ParticipantExcludedError(
            "no symptoms: all observed MISC values are zero"
        )

    predictor = _CachedPredictor(conditions, svc, cfg.dt_sim, cfg.fit_stride)
    rng = np.random.default_rng(cfg.rng_seed)

    def obj(theta: np.ndarray) -> float:
        try:
            params = _decode(variant, theta)
        except (OverflowError, FloatingPointError, DataFormatError):
            return np.inf
        if not all(np.isfinite(v) for v in params.values()):
            return np.inf
        try:
            preds = predictor.predict(params)
            j = objective_j(conditions, preds)
        except (ArithmeticError, FloatingPointError):
            return np.inf
        if not np.isfinite(j):
            return np.inf
        return j + _bound_penalty(params, cfg.bounds)

    starts = []
    best = None
    for _ in range(cfg.n_starts):
        p0 = _draw_start(variant, cfg.bounds, rng)
        theta0 = _encode(variant, p0)
        res = minimize(
            obj,
            theta0,
            method="Nelder-Mead",
            options={
                "maxiter": cfg.max_iters,
                "xatol": 1e-6,
                "fatol": cfg.rel_tol,
                "adaptive": True,
            },
        )
        final_params = _decode(variant, res.x)
        diag = StartDiagnostic(
            initial_params=p0,
            final_params=final_params,
            J=float(res.fun),
            converged=bool(res.success),
            n_evals=int(res.nfev),
        )
        starts.append(diag)
        if best is None or res.fun < best[0]:
            best = (float(res.fun), final_params)

    if best is None or not np.isfinite(best[0]):
        raise DataFormatError("no start converged to a finite objective")

    best_params = best[1]
    predictions = predictor.predict(best_params)
    residuals = [
        c.observed.values - p for c, p in zip(conditions, predictions)
    ]
    return FitResult(
        variant=variant,
        best_params=best_params,
        J=objective_j(conditions, predictions),
        residuals=residuals,
        predictions=predictions,
        starts=starts,
    )


def fit_per_condition(
    variant: OutputVariant,
    conditions,
    svc: SvcParams = SvcParams(),
    cfg: FitConfig = FitConfig(),
) -> list[FitResult]:
    """Independent parameter set per condition (conN = 1 each)."""
    results = []
    for i, cond in enumerate(conditions):
        sub_cfg = FitConfig(
            n_starts=cfg.n_starts,
            max_iters=cfg.max_iters,
            rel_tol=cfg.rel_tol,
            bounds=cfg.bounds,
            rng_seed=cfg.rng_seed + i,
            dt_sim=cfg.dt_sim,
            fit_stride=cfg.fit_stride,
        )
        results.append(fit(variant, [cond], svc, sub_cfg))
    return results


def write_params_csv(params: OutputParams, path) -> None:
    """Write `param,value` rows (variant recorded as a pseudo-parameter)."""
    with open(path, "w", newline="") as fh:
        fh.write("param,value\n")
        fh.write(f"variant,{params.variant.value}\n")
        for name, val in zip(params.names(), params.values()):
            fh.write(f"{name},%.12g\n" % val)


def read_params_csv(path) -> OutputParams:
    from .motion_data import _read_csv_rows

    header, rows = _read_csv_rows(path)
    if header[:2] != ["param", "value"]:
        raise DataFormatError(f"{path}: expected header param,value")
    mapping = {r[0]: r[1] for r in rows}
    if "variant" not in mapping:
        raise DataFormatError(f"{path}: missing 'variant' row")
    variant = OutputVariant.parse(mapping.pop("variant"))
    return OutputParams.from_mapping(variant, mapping)


def write_diagnostics_csv(result: FitResult, path) -> None:
    """One row per start: initial and final parameters, J, convergence."""
    names = _param_names(result.variant)
    with open(path, "w", newline="") as fh:
        cols = ["start", "J", "converged", "n_evals"]
        cols += [f"init_{n}" for n in names] + [f"final_{n}" for n in names]
        fh.write(",".join(cols) + "\n")
        for i, d in enumerate(result.starts):
            cells = [str(i), "%.12g" % d.J, str(int(d.converged)), str(d.n_evals)]
            cells += ["%.12g" % v for v in d.initial_params.values()]
            cells += ["%.12g" % v for v in d.final_params.values()]
            fh.write(",".join(cells) + "\n")
