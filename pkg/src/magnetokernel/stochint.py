"""Discrete Ito and Stratonovich line integrals along Feynman-Kac paths.

Ito sums evaluate the field at the left node of each step, Stratonovich sums
at the midpoint of the step.  Both accept a :class:`~magnetokernel.paths.SpacePath`,
a single ``(n + 1, D)`` array of nodes, or a batch ``(P, n + 1, D)``.

:func:`variance_decomposition` splits the double sum

    Sigma[q] = sum_{k,l} dq_k . G(p_k, p_l) . dq_l

by writing every increment as ``dq_k = d_k + p_k + beta_k``: the straight-line
drift ``d_k``, the predictable bridge drift ``p_k = -u_k dt / (tau - s_k)``
(``u`` is the bridge displacement from the line) and the martingale remainder
``beta_k``.  The six contributions add up to the direct total exactly.
"""

from dataclasses import dataclass

import numpy as np

from .fields import CovarianceError
from .paths import SpacePath


class FieldEvaluationError(ValueError):
    """A vector field returned non-finite values along a path."""


@dataclass(frozen=True)
class LineIntegralResult:
    ito: float
    stratonovich: float
    correction: float


def _nodes(path):
    if isinstance(path, SpacePath):
        return path.points
    pts = np.asarray(path, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim < 2 or pts.shape[-2] < 2:
        raise ValueError("a path needs at least two nodes")
    return pts


def evaluate(field, points):
    """Evaluate ``field`` at ``points`` and reject NaN or infinite values."""
    values = np.asarray(field(points), dtype=float)
    if values.shape != points.shape:
        values = np.broadcast_to(values, points.shape)
    if not np.all(np.isfinite(values)):
        raise FieldEvaluationError("vector field is not finite at some path points")
    return values


def ito_sum(field, points):
    """``sum_k A(q_k) . (q_{k+1} - q_k)`` over the last two axes."""
    dq = np.diff(points, axis=-2)
    return np.einsum("...kd,...kd->...", evaluate(field, points[..., :-1, :]), dq)


def midpoint_sum(field, points):
    """``sum_k A((q_k + q_{k+1}) / 2) . (q_{k+1} - q_k)`` over the last two axes."""
    dq = np.diff(points, axis=-2)
    mid = 0.5 * (points[..., 1:, :] + points[..., :-1, :])
    return np.einsum("...kd,...kd->...", evaluate(field, mid), dq)


def ito_integral(field, path):
    """Left-endpoint (non-anticipating) sum of ``A . dq``."""
    out = ito_sum(field, _nodes(path))
    return float(out) if np.ndim(out) == 0 else out


def stratonovich_integral(field, path):
    """Midpoint-rule sum of ``A . dq``."""
    out = midpoint_sum(field, _nodes(path))
    return float(out) if np.ndim(out) == 0 else out


def line_integrals(field, path):
    """Both sums and their difference, the discrete ``(sigma^2/2) int div A ds``."""
    pts = _nodes(path)
    ito = ito_sum(field, pts)
    dq = np.diff(pts, axis=-2)
    mid = 0.5 * (pts[..., 1:, :] + pts[..., :-1, :])
    diff = evaluate(field, mid) - evaluate(field, pts[..., :-1, :])
    correction = np.einsum("...kd,...kd->...", diff, dq)
    if np.ndim(ito) == 0:
        return LineIntegralResult(float(ito), float(ito + correction), float(correction))
    return LineIntegralResult(ito, ito + correction, correction)


@dataclass(frozen=True)
class VarianceDecomposition:
    """Contributions to ``Sigma[q]``; ``terms`` lists the six in a fixed order."""

    drift_drift: float
    bridge_bridge: float
    equal_time: float
    drift_bridge_past: float
    drift_bridge_future: float
    stochastic: float
    total: float

    @property
    def terms(self):
        return (
            self.drift_drift,
            self.bridge_bridge,
            self.equal_time,
            self.drift_bridge_past,
            self.drift_bridge_future,
            self.stochastic,
        )

    @property
    def six_term_sum(self):
        return float(sum(self.terms))


def variance_decomposition(covariance, path, rule="left", block=128, tol=1e-10):
    """Split ``Sigma[q]`` for one path into six contributions plus the direct total.

    ``rule`` picks the evaluation points ``p_k`` of the covariance: ``"left"``
    uses the nodes ``q_k``, ``"midpoint"`` the step midpoints (the rule the
    Gaussian-average estimator uses).
    """
    if not isinstance(path, SpacePath):
        raise TypeError("variance_decomposition needs a SpacePath")
    q = path.points
    n = path.n_steps
    dq = np.diff(q, axis=0)
    if rule == "left":
        evals = q[:-1]
    elif rule == "midpoint":
        evals = 0.5 * (q[1:] + q[:-1])
    else:
        raise ValueError(f"rule must be 'left' or 'midpoint', got {rule!r}")
    s = path.nodes
    u = q - path.drift
    d = np.broadcast_to((path.x_prime - path.x) / n, dq.shape)
    p = -u[:-1] * (np.diff(s) / (path.tau - s[:-1]))[:, None]
    beta = dq - d - p

    vecs = {"d": d, "p": p, "b": beta, "q": dq}
    acc = dict.fromkeys(("dd", "pp", "dp_lower", "dp", "db", "pb", "bb", "q", "bb_diag"), 0.0)
    idx = np.arange(n)
    for start in range(0, n, block):
        rows = slice(start, min(start + block, n))
        g = covariance.tensor(evals[rows, None, :], evals[None, :, :])
        h = {key: np.einsum("klij,lj->ki", g, v) for key, v in vecs.items()}
        lower = (idx[None, :] <= idx[rows, None])[..., None, None]
        h_p_lower = np.einsum("klij,lj->ki", np.where(lower, g, 0.0), p)
        g_diag = g[np.arange(g.shape[0]), idx[rows]]
        acc["dd"] += np.sum(d[rows] * h["d"])
        acc["pp"] += np.sum(p[rows] * h["p"])
        acc["dp"] += np.sum(d[rows] * h["p"])
        acc["dp_lower"] += np.sum(d[rows] * h_p_lower)
        acc["db"] += np.sum(d[rows] * h["b"])
        acc["pb"] += np.sum(p[rows] * h["b"])
        acc["bb"] += np.sum(beta[rows] * h["b"])
        acc["q"] += np.sum(dq[rows] * h["q"])
        acc["bb_diag"] += np.einsum("ki,kij,kj->", beta[rows], g_diag, beta[rows])

    total = float(acc["q"])
    scale = float(np.sum(np.abs(dq)) ** 2 * np.max(np.abs(covariance.tensor(evals[:1], evals[:1]))) + 1e-300)
    if total < -tol * max(scale, 1.0):
        raise CovarianceError(f"Sigma[q] = {total:.3e} < 0: covariance is not positive semidefinite on the path")
    past = 2.0 * acc["dp_lower"]
    future = 2.0 * (acc["dp"] - acc["dp_lower"])
    stochastic = 2.0 * (acc["db"] + acc["pb"]) + acc["bb"] - acc["bb_diag"]
    return VarianceDecomposition(
        drift_drift=float(acc["dd"]),
        bridge_bridge=float(acc["pp"]),
        equal_time=float(acc["bb_diag"]),
        drift_bridge_past=float(past),
        drift_bridge_future=float(future),
        stochastic=float(stochastic),
        total=total,
    )
