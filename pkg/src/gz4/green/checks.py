"""Numerical checks of the defining properties: Laplace eigenvalue and log-poles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import mpmath as mp

from ..modgroup import PointH
from .evaluator import EvalResult

Evaluator = Callable[[PointH], Union[EvalResult, mp.mpf, float]]


class StepTooSmall(ValueError):
    """Evaluation noise amplified by 1/h^2 exceeds the requested tolerance."""


class BadFit(ValueError):
    """The samples are not explained by c*log|tau - tau_hat| + smooth."""


def _value(res, dps: int) -> tuple[mp.mpf, mp.mpf]:
    if isinstance(res, EvalResult):
        return mp.mpf(res.value), mp.mpf(res.error_bound)
    v = mp.mpf(res)
    return v, abs(v) * mp.mpf(10) ** (-dps) + mp.mpf(10) ** (-dps)


def laplacian_residual(f: Evaluator, tau: PointH, h, tolerance=mp.mpf("1e-3")) -> mp.mpf:
    """|Delta_hyp f + 2 f| / |f| at tau, with the 5-point stencil of step h.

    Delta_hyp = -y^2 (d_x^2 + d_y^2); weight-4 Green's functions have eigenvalue -2.
    """
    dps = tau.dps
    with mp.workdps(dps + 5):
        h = mp.mpf(h)
        x, y = tau.x, tau.y
        if not 0 < h < y:
            raise ValueError("step must lie in (0, Im tau)")
        points = [(x, y), (x + h, y), (x - h, y), (x, y + h), (x, y - h)]
        vals = [_value(f(PointH(px, py, dps)), dps) for px, py in points]
        f0 = vals[0][0]
        if f0 == 0:
            raise ValueError("f vanishes at tau; relative residual undefined")
        lap = (vals[1][0] + vals[2][0] + vals[3][0] + vals[4][0] - 4 * f0) / (h * h)
        noise = (y * y * 8 * max(b for _, b in vals) / (h * h) + 2 * vals[0][1]) / abs(f0)
        if noise > mp.mpf(tolerance):
            raise StepTooSmall(f"stencil noise {mp.nstr(noise, 3)} exceeds tolerance")
        return abs(-y * y * lap + 2 * f0) / abs(f0)


@dataclass(frozen=True)
class PoleFit:
    coefficient: mp.mpf
    constant: mp.mpf
    residual: mp.mpf
    samples: int

    def __float__(self) -> float:
        return float(self.coefficient)


def pole_coefficient(f: Evaluator, tau_hat: PointH, radii=(mp.mpf("1e-3"), mp.mpf("1e-2")),
                     rings: int = 3, angles: int = 4, max_relative_residual=mp.mpf("0.05")) -> PoleFit:
    """Least-squares fit f ~ c log|tau - tau_hat| + a + b_x dx + b_y dy on rings around tau_hat.

    Ring radii are geometric between radii[0]*y and radii[1]*y.  The linear
    terms absorb the gradient of the smooth part.
    """
    dps = tau_hat.dps
    with mp.workdps(dps + 5):
        r0, r1 = (mp.mpf(r) * tau_hat.y for r in radii)
        rows, rhs = [], []
        for i in range(rings):
            r = r0 * (r1 / r0) ** (mp.mpf(i) / max(rings - 1, 1))
            for j in range(angles):
                theta = 2 * mp.pi * (j + mp.mpf(1) / 8) / angles
                dx, dy = r * mp.cos(theta), r * mp.sin(theta)
                v, _ = _value(f(PointH(tau_hat.x + dx, tau_hat.y + dy, dps)), dps)
                rows.append([mp.log(r), 1, dx, dy])
                rhs.append(v)
        A = mp.matrix(rows)
        b = mp.matrix(rhs)
        sol, _ = mp.qr_solve(A, b)
        fitted = A * sol
        residual = mp.sqrt(sum((fitted[k] - b[k]) ** 2 for k in range(len(rhs))) / len(rhs))
        c = sol[0]
        if residual > max_relative_residual * abs(c):
            raise BadFit(f"fit residual {mp.nstr(residual, 3)} vs coefficient {mp.nstr(c, 5)}")
        return PoleFit(+c, +sol[1], +residual, len(rhs))
