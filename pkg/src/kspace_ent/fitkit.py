"""Luttinger-liquid relations and small nonlinear least-squares fits.

Four model forms are supported:

    power            y = a x^b
    exp_offset       y = A exp(-x / sigma) + S0
    log_correction   y = Theta ln x + beta + gamma / x^2
    linear           y = a x + b

Fits use a damped Gauss-Newton (Levenberg-Marquardt) iteration with a
central-difference Jacobian.  Power laws with all y > 0 are instead solved in
closed form as a straight line in log-log coordinates.  The reported ``rss``
is always the plain sum of squared residuals in y, so it can be compared
between models; the quantity actually minimised is kept in
``extra["objective_rss"]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_ITER = 500

MODELS = {
    "power": ("a", "b"),
    "exp_offset": ("A", "sigma", "S0"),
    "log_correction": ("Theta", "beta", "gamma"),
    "linear": ("a", "b"),
}


def luttinger(delta: float) -> tuple[float, float]:
    """Luttinger parameter K and occupation exponent alpha = (K + 1/K)/2 - 1 of the XXZ chain."""
    if delta <= -1.0:
        raise ValueError(f"Delta={delta}: K diverges at Delta=-1 and is undefined below")
    if delta > 1.0:
        raise ValueError(f"Delta={delta} lies outside the critical region (-1, 1]")
    K = np.pi / (2.0 * (np.pi - np.arccos(delta)))
    return float(K), float(0.5 * (K + 1.0 / K) - 1.0)


def model_function(model: str):
    if model == "power":
        return lambda x, p: p[0] * np.power(x, p[1])
    if model == "exp_offset":
        return lambda x, p: p[0] * np.exp(-x / p[1]) + p[2]
    if model == "log_correction":
        return lambda x, p: p[0] * np.log(x) + p[1] + p[2] / x**2
    if model == "linear":
        return lambda x, p: p[0] * x + p[1]
    raise ValueError(f"unknown model {model!r}; choose from {sorted(MODELS)}")


@dataclass
class FitResult:
    model: str
    params: dict[str, float]
    rss: float
    converged: bool
    iterations: int
    gradient_norm: float = 0.0
    n_points: int = 0
    extra: dict = field(default_factory=dict)

    def predict(self, x):
        p = np.array([self.params[k] for k in MODELS[self.model]])
        return model_function(self.model)(np.asarray(x, dtype=float), p)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": dict(self.params),
            "rss": self.rss,
            "converged": self.converged,
            "iterations": self.iterations,
        }


def _jacobian(f, x, p):
    J = np.empty((x.size, p.size))
    for i in range(p.size):
        h = 1e-6 * max(1.0, abs(p[i]))
        dp = np.zeros_like(p)
        dp[i] = h
        J[:, i] = (f(x, p + dp) - f(x, p - dp)) / (2 * h)
    return J


def _initial(model: str, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if model == "linear":
        return np.polyfit(x, y, 1)
    if model == "log_correction":
        X = np.column_stack([np.log(x), np.ones_like(x), 1.0 / x**2])
        return np.linalg.lstsq(X, y, rcond=None)[0]
    if model == "power":
        if np.all(y > 0) and np.all(x > 0):
            b, ln_a = np.polyfit(np.log(x), np.log(y), 1)
            return np.array([np.exp(ln_a), b])
        # endpoint slope on a log scale where possible, else linear growth
        i, j = np.argmin(x), np.argmax(x)
        if y[i] * y[j] > 0 and x[i] > 0:
            b = np.log(y[j] / y[i]) / np.log(x[j] / x[i])
            return np.array([y[j] / x[j] ** b, b])
        return np.array([y[j] / x[j] if x[j] else 1.0, 1.0])
    if model == "exp_offset":
        order = np.argsort(x)
        xs, ys = x[order], y[order]
        S0 = ys[-1] - 0.1 * abs(ys[0] - ys[-1])
        ratio = (ys[0] - S0) / (ys[-1] - S0)
        span = xs[-1] - xs[0]
        sigma = span / np.log(ratio) if ratio > 1 else span
        return np.array([(ys[0] - S0) * np.exp(xs[0] / sigma), sigma, S0])
    raise ValueError(model)


def levenberg_marquardt(f, x, y, p0, max_iter: int = MAX_ITER, gtol: float = 1e-10):
    """Minimise sum (f(x, p) - y)^2 from ``p0``.

    Returns ``(p, rss, converged, iterations, gradient_norm)``; convergence
    means ``|J^T r| <= gtol (1 + rss)``.
    """
    p = np.asarray(p0, dtype=float).copy()
    r = f(x, p) - y
    rss = float(r @ r)
    mu = None
    for it in range(max_iter + 1):
        J = _jacobian(f, x, p)
        g = J.T @ r
        gnorm = float(np.linalg.norm(g))
        if gnorm <= gtol * (1.0 + rss):
            return p, rss, True, it, gnorm
        if it == max_iter:
            break
        JTJ = J.T @ J
        d = np.maximum(np.diag(JTJ), 1e-300)
        if mu is None:
            mu = 1e-3 * float(d.max())
        accepted = False
        for _ in range(60):
            try:
                step = np.linalg.solve(JTJ + mu * np.diag(d), -g)
            except np.linalg.LinAlgError:
                mu *= 10.0
                continue
            p_new = p + step
            r_new = f(x, p_new) - y
            rss_new = float(r_new @ r_new)
            if np.isfinite(rss_new) and rss_new <= rss:
                accepted = True
                p, r = p_new, r_new
                improvement = rss - rss_new
                rss = rss_new
                mu = max(mu / 3.0, 1e-15 * float(d.max()))
                break
            mu *= 4.0
        if not accepted or (improvement == 0.0 and np.linalg.norm(step) <= 1e-15 * (1 + np.linalg.norm(p))):
            # no representable descent left
            J = _jacobian(f, x, p)
            gnorm = float(np.linalg.norm(J.T @ r))
            return p, rss, gnorm <= gtol * (1.0 + rss), it + 1, gnorm
    return p, rss, False, max_iter, gnorm


def fit_model(points, model: str, init: dict | None = None) -> FitResult:
    """Least-squares fit of ``(x, y)`` points to one of the four model forms.

    A power law with every y > 0 is a linear regression of ln y on ln x and
    is solved directly; ``init`` is then irrelevant.  Otherwise starting
    values come from the data (closed-form regressions, endpoint slopes) and
    from ``init`` when given, whichever has the lower residual, so the
    minimised objective never exceeds its value at ``init``.
    """
    names = MODELS.get(model)
    f = model_function(model)
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (x, y) pairs")
    x, y = pts[:, 0], pts[:, 1]
    if x.size < len(names) + 1:
        raise ValueError(f"{model} fit needs at least {len(names) + 1} points, got {x.size}")
    if np.unique(x).size != x.size:
        raise ValueError("x values must be distinct")
    if model in ("power", "log_correction") and np.any(x <= 0):
        raise ValueError(f"{model} fit needs x > 0")

    if model == "power" and np.all(y > 0):
        return _loglog_power(x, y)

    starts = [_initial(model, x, y)]
    if init is not None:
        starts.append(np.array([float(init[k]) for k in names]))

    def rss_at(p):
        with np.errstate(all="ignore"):
            r = f(x, p) - y
        v = float(r @ r)
        return v if np.isfinite(v) else np.inf

    p0 = min(starts, key=rss_at)
    with np.errstate(over="ignore", invalid="ignore"):
        p, rss, ok, it, gnorm = levenberg_marquardt(f, x, y, p0)
    if not np.all(np.isfinite(p)):
        raise ArithmeticError(f"{model} fit produced non-finite parameters")
    return FitResult(model, dict(zip(names, map(float, p))), rss, ok, it, gnorm, int(x.size), {"objective_rss": rss})


def _loglog_power(x: np.ndarray, y: np.ndarray) -> FitResult:
    X = np.column_stack([np.log(x), np.ones_like(x)])
    ly = np.log(y)
    (b, ln_a), *_ = np.linalg.lstsq(X, ly, rcond=None)
    r_log = X @ np.array([b, ln_a]) - ly
    gnorm = float(np.linalg.norm(X.T @ r_log))
    a = float(np.exp(ln_a))
    r = a * x**b - y
    obj = float(r_log @ r_log)
    return FitResult(
        "power", {"a": a, "b": float(b)}, float(r @ r), gnorm <= 1e-10 * (1.0 + obj), 1, gnorm, int(x.size),
        {"objective_rss": obj, "space": "loglog"},
    )


def r_squared(result: FitResult, points) -> float:
    pts = np.asarray(points, dtype=float)
    y = pts[:, 1]
    tss = float(np.sum((y - y.mean()) ** 2))
    return 1.0 - result.rss / tss if tss > 0 else 1.0
