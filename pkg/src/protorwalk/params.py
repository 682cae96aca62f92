"""Walk parameters and the perturbation constants they induce."""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class WalkParams:
    """Parameters of a p-rotor walk in an (alpha, beta)-random environment.

    ``p`` is the probability that the rotor at the current site is broken
    (keeps its direction); ``alpha`` is the probability that an initial rotor
    on a positive site points right, ``beta`` that one on a negative site
    points left.

    ``allow_degenerate`` admits ``p`` in {0, 1}. It exists for sanity tests
    of the deterministic cases only; derived quantities that need
    ``0 < p < 1`` refuse degenerate parameters.
    """

    p: float
    alpha: float
    beta: float
    allow_degenerate: bool = False

    def __post_init__(self) -> None:
        lo_ok = self.p >= 0.0 if self.allow_degenerate else self.p > 0.0
        hi_ok = self.p <= 1.0 if self.allow_degenerate else self.p < 1.0
        if not (lo_ok and hi_ok) or math.isnan(self.p):
            raise ValueError(f"p must lie in (0, 1), got {self.p!r}")
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")

    @property
    def native(self) -> bool:
        return self.alpha == 0.0 and self.beta == 0.0

    def as_dict(self) -> dict:
        return {"p": self.p, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class PerturbationParams:
    """Coefficients of the limiting equation X = B + a sup X + b inf X.

    ``lam`` is the coefficient of the running maximum in the explicit
    one-sided limit B + lam * M; it is ``None`` unless ``b == 0``.
    ``scale`` is the diffusivity factor sqrt((1 - p) / p).
    """

    a: float
    b: float
    lam: float | None
    scale: float

    @property
    def bound_constant(self) -> float:
        """Constant C in |M_{j+n} - M_j| <= C max_k |W_{j+k} - W_j|."""
        return max(1.0 / (1.0 - self.a), 1.0 / (1.0 - self.b),
                   1.0 / ((1.0 - self.a) * (1.0 - self.b)))

    @property
    def corrected_bound_constant(self) -> float:
        """A constant for the same bound that is valid for every sign of a, b.

        Writing u = |M_{j+n} - M_j|, v = |m_{j+n} - m_j| and w for the W
        oscillation, the extrema identities give u(1-a) <= w + b_ v and
        v(1-b) <= w + a_ u with x_ = max(-x, 0). ``bound_constant`` drops the
        cross terms, which is only legitimate when a, b >= 0; for p < 1/2 it
        is violated by actual paths.
        """
        an, bn = max(-self.a, 0.0), max(-self.b, 0.0)
        det = (1.0 - self.a) * (1.0 - self.b) - an * bn
        return max((1.0 - self.b + bn) / det, (1.0 - self.a + an) / det)


def derive_perturbation(params: WalkParams) -> PerturbationParams:
    if not 0.0 < params.p < 1.0:
        raise ValueError("perturbation constants need 0 < p < 1")
    p, alpha, beta = params.p, params.alpha, params.beta
    drift = 2.0 * p - 1.0
    a = alpha * drift / p + 0.0  # + 0.0 turns -0.0 into 0.0
    b = beta * drift / p + 0.0
    lam = a / (1.0 - a) if b == 0.0 else None
    return PerturbationParams(a=a, b=b, lam=lam, scale=math.sqrt((1.0 - p) / p))


def one_sided_lambda(p: float, alpha: float) -> float:
    """Closed form of the one-sided coefficient, written independently of ``a``."""
    return alpha * (2.0 * p - 1.0) / (alpha * (1.0 - p) + p * (1.0 - alpha))
