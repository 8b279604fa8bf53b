"""Hierarchical multiple regression with OLS, VIF screening and F-change tests."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import RankDeficientError


# -- distributions ---------------------------------------------------------


def _betacf(a: float, b: float, x: float, max_iter: int = 500, eps: float = 1e-16) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < eps:
            return h
    return h


def _ibeta(a: float, b: float, x: float, y: float) -> float:
    # ``y`` is ``1 - x`` computed by the caller without cancellation
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log(y)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, y) / b


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function ``I_x(a, b)``."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    x = min(max(x, 0.0), 1.0)
    return _ibeta(a, b, x, 1.0 - x)


def t_two_sided_p(t: float, df: float) -> float:
    if math.isinf(t):
        return 0.0
    if math.isnan(t):
        return math.nan
    t2 = t * t
    return _ibeta(df / 2.0, 0.5, df / (df + t2), t2 / (df + t2))


def f_sf(f: float, df1: float, df2: float) -> float:
    """Upper tail ``P(F > f)`` of the F distribution."""
    if math.isinf(f):
        return 0.0
    if f <= 0:
        return 1.0
    d = df2 + df1 * f
    return _ibeta(df2 / 2.0, df1 / 2.0, df2 / d, df1 * f / d)


# -- data ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    columns: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    rows: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.columns):
            raise ValueError("X must be 2-D with one column per name")
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("column names must be unique")
        if y.shape != (X.shape[0],):
            raise ValueError("y must have one value per row")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise ValueError("design matrix contains missing or non-finite values")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def select(self, cols: Sequence[str]) -> DesignMatrix:
        idx = [self.columns.index(c) for c in cols]
        return DesignMatrix(tuple(cols), self.X[:, idx], self.y, self.rows)


@dataclass(frozen=True)
class OlsFit:
    columns: tuple[str, ...]
    intercept: float
    coef: np.ndarray
    se: np.ndarray
    intercept_se: float
    resid_var: float
    r2: float
    df_resid: int


@dataclass(frozen=True)
class Coefficient:
    variable: str
    B: float
    SEB: float
    b: float
    t: float
    p: float


@dataclass(frozen=True)
class RegressionStageResult:
    stage: int
    added: tuple[str, ...]
    coefficients: tuple[Coefficient, ...]
    intercept: float
    R: float  # signed by the sum of standardized coefficients
    R_abs: float
    R2: float
    delta_R2: float
    F_change: float
    p_F: float
    df1: int
    df2: int
    saturated: bool = False

    def coefficient(self, name: str) -> Coefficient:
        for c in self.coefficients:
            if c.variable == name:
                return c
        raise KeyError(name)


@dataclass
class VifResult:
    kept: list[str]
    dropped: list[tuple[str, float]] = field(default_factory=list)
    final_vif: dict[str, float] = field(default_factory=dict)


# -- fitting ---------------------------------------------------------------

_DEP_TOL = 1e-10


def ols_fit(X: DesignMatrix) -> OlsFit:
    """Least squares with an intercept, solved through a QR factorization."""
    n, p = X.X.shape
    if n <= p + 1:
        raise ValueError(f"need more than {p + 1} rows for {p} predictors, got {n}")
    A = np.column_stack([np.ones(n), X.X])
    Q, R = np.linalg.qr(A)
    diag = np.abs(np.diag(R))
    norms = np.linalg.norm(A, axis=0)
    dependent = [
        X.columns[j - 1]
        for j in range(1, p + 1)
        if norms[j] == 0 or diag[j] <= _DEP_TOL * norms[j]
    ]
    if dependent:
        raise RankDeficientError("columns are linearly dependent on earlier columns", dependent)

    beta = np.linalg.solve(R, Q.T @ X.y)
    resid = X.y - A @ beta
    rss = float(resid @ resid)
    tss = float(((X.y - X.y.mean()) ** 2).sum())
    if tss == 0:
        raise ValueError("response has zero variance")
    df = n - p - 1
    s2 = rss / df
    Rinv = np.linalg.solve(R, np.eye(p + 1))
    se = np.sqrt(s2 * (Rinv**2).sum(axis=1))
    return OlsFit(
        columns=X.columns,
        intercept=float(beta[0]),
        coef=beta[1:],
        se=se[1:],
        intercept_se=float(se[0]),
        resid_var=s2,
        r2=max(0.0, min(1.0, 1.0 - rss / tss)),
        df_resid=df,
    )


def _aux_r2(target: np.ndarray, others: np.ndarray) -> float:
    n = len(target)
    tss = float(((target - target.mean()) ** 2).sum())
    if tss == 0:
        return 1.0
    A = np.column_stack([np.ones(n), others])
    beta, *_ = np.linalg.lstsq(A, target, rcond=None)
    resid = target - A @ beta
    return 1.0 - float(resid @ resid) / tss


def vifs(X: DesignMatrix) -> dict[str, float]:
    out = {}
    for j, name in enumerate(X.columns):
        others = np.delete(X.X, j, axis=1)
        r2 = _aux_r2(X.X[:, j], others)
        out[name] = math.inf if r2 >= 1.0 - 1e-12 else 1.0 / (1.0 - r2)
    return out


def vif_screen(X: DesignMatrix, threshold: float = 10.0) -> VifResult:
    """Drop the worst column while any variance inflation factor exceeds ``threshold``.

    Among equal maxima (e.g. two infinite VIFs) the later-listed column goes.
    """
    if len(X.columns) < 2:
        raise ValueError("VIF screening needs at least 2 columns")
    if X.n <= len(X.columns):
        raise ValueError("VIF screening needs more rows than columns")
    kept = list(X.columns)
    res = VifResult(kept=kept)
    while len(kept) >= 2:
        v = vifs(X.select(kept))
        worst = max(v.values())
        if worst <= threshold:
            res.final_vif = v
            break
        name = [c for c in kept if v[c] == worst][-1]
        kept.remove(name)
        res.dropped.append((name, worst))
    else:
        res.final_vif = {kept[0]: 1.0} if kept else {}
    return res


def _coefficients(X: DesignMatrix, fit: OlsFit) -> tuple[Coefficient, ...]:
    sd_y = X.y.std(ddof=1)
    sd_x = X.X.std(axis=0, ddof=1)
    out = []
    for j, name in enumerate(X.columns):
        B, se = float(fit.coef[j]), float(fit.se[j])
        t = B / se if se > 0 else math.copysign(math.inf, B)
        out.append(
            Coefficient(name, B, se, float(B * sd_x[j] / sd_y), t, t_two_sided_p(t, fit.df_resid))
        )
    return tuple(out)


def hierarchical_regression(
    X: DesignMatrix, stages: Sequence[Sequence[str]]
) -> list[RegressionStageResult]:
    """Fit nested OLS models, adding one group of predictors per stage."""
    seen: set[str] = set()
    for k, grp in enumerate(stages, start=1):
        if not grp:
            raise ValueError(f"stage {k} adds no columns")
        for c in grp:
            if c in seen:
                raise ValueError(f"column {c!r} appears in more than one stage")
            if c not in X.columns:
                raise ValueError(f"unknown column {c!r} in stage {k}")
            seen.add(c)

    results = []
    cols: list[str] = []
    prev_r2 = 0.0
    for k, grp in enumerate(stages, start=1):
        cols = cols + list(grp)
        sub = X.select(cols)
        fit = ols_fit(sub)
        coefs = _coefficients(sub, fit)
        q = len(grp)
        df2 = fit.df_resid
        d_r2 = fit.r2 - prev_r2
        resid_share = 1.0 - fit.r2
        saturated = resid_share <= 1e-12
        if saturated:
            f_change = math.inf
        else:
            f_change = max(d_r2, 0.0) / q / (resid_share / df2)
        r_abs = math.sqrt(fit.r2)
        sign = -1.0 if sum(c.b for c in coefs) < 0 else 1.0
        results.append(
            RegressionStageResult(
                stage=k,
                added=tuple(grp),
                coefficients=coefs,
                intercept=fit.intercept,
                R=sign * r_abs,
                R_abs=r_abs,
                R2=fit.r2,
                delta_R2=d_r2,
                F_change=f_change,
                p_F=f_sf(f_change, q, df2),
                df1=q,
                df2=df2,
                saturated=saturated,
            )
        )
        prev_r2 = fit.r2
    return results


def _num(x: float) -> float | None:
    return None if not math.isfinite(x) else x


def report_json(
    results: Sequence[RegressionStageResult],
    n: int,
    response: str,
    screen: VifResult | None = None,
) -> dict:
    out: dict = {"n": n, "response": response, "stages": []}
    if screen is not None:
        out["vif"] = {
            "kept": screen.kept,
            "dropped": [{"variable": c, "vif": _num(v)} for c, v in screen.dropped],
            "final": {c: _num(v) for c, v in screen.final_vif.items()},
        }
    for r in results:
        out["stages"].append(
            {
                "stage": r.stage,
                "added": list(r.added),
                "R": r.R,
                "R_abs": r.R_abs,
                "R2": r.R2,
                "delta_R2": r.delta_R2,
                "F_change": _num(r.F_change),
                "p_F": r.p_F,
                "df": [r.df1, r.df2],
                "saturated": r.saturated,
                "intercept": r.intercept,
                "coefficients": [
                    {"variable": c.variable, "B": c.B, "SEB": c.SEB, "b": c.b,
                     "t": _num(c.t), "p": c.p}
                    for c in r.coefficients
                ],
            }
        )
    return out
