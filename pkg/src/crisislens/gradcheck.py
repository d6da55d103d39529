"""Verify analytic gradients against central finite differences."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .autodiff import Tensor
from .errors import ConfigError, NumericError
from .optim import ParamStore

# relative error denominator floor, so zero gradients compare cleanly
_DENOM_FLOOR = 1e-8


@dataclass
class GradReport:
    """Per-parameter max relative error between analytic and numeric gradients."""

    per_param: dict[str, float] = field(default_factory=dict)
    epsilon: float = 1e-4

    @property
    def max_error(self) -> float:
        return max(self.per_param.values(), default=0.0)

    @property
    def worst_param(self) -> str | None:
        if not self.per_param:
            return None
        return max(self.per_param, key=lambda k: self.per_param[k])

    def __str__(self) -> str:
        lines = [f"grad check (epsilon={self.epsilon:g}):"]
        for name, err in self.per_param.items():
            lines.append(f"  {name}: {err:.3e}")
        lines.append(f"  max: {self.max_error:.3e} ({self.worst_param})")
        return "\n".join(lines)


def _eval_scalar(f: Callable[[ParamStore], Tensor], params: ParamStore) -> Tensor:
    out = f(params)
    if not isinstance(out, Tensor) or out.data.size != 1:
        raise ConfigError("grad_check target must return a scalar Tensor")
    if not np.isfinite(out.data).all():
        raise NumericError("grad_check target evaluated to a non-finite value")
    return out


def grad_check(
    f: Callable[[ParamStore], Tensor],
    params: ParamStore,
    epsilon: float = 1e-4,
) -> GradReport:
    """Compare backward-pass gradients of ``f`` with central finite differences.

    ``f`` must be a deterministic scalar-valued function of the parameters.
    The relative error per coordinate uses the denominator
    ``max(|analytic|, |numeric|, 1e-8)``.
    """
    if not (1e-6 <= epsilon <= 1e-3):
        raise ConfigError(f"grad_check epsilon must be in [1e-6, 1e-3], got {epsilon:g}")

    params.zero_grad()
    out = _eval_scalar(f, params)
    out.backward()
    analytic = {
        name: (t.grad.copy() if t.grad is not None else np.zeros_like(t.data))
        for name, t in params.items()
    }

    report = GradReport(epsilon=epsilon)
    for name, t in params.items():
        flat = t.data.reshape(-1)
        a_flat = analytic[name].reshape(-1)
        worst = 0.0
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            f_plus = _eval_scalar(f, params).item()
            flat[i] = orig - epsilon
            f_minus = _eval_scalar(f, params).item()
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * epsilon)
            denom = max(abs(a_flat[i]), abs(numeric), _DENOM_FLOOR)
            worst = max(worst, abs(a_flat[i] - numeric) / denom)
        report.per_param[name] = worst
    return report
