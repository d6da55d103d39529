"""Named parameter storage and the bias-corrected adaptive update."""

from __future__ import annotations

from typing import Iterator, Mapping

import numpy as np

from .autodiff import Tensor
from .errors import DataError, DimensionError

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class ParamStore:
    """Ordered map of parameter name -> Tensor, plus per-parameter Adam state.

    Names are unique; moment buffers mirror the parameter shapes. Iteration
    order is insertion order, which keeps every downstream loop deterministic.
    """

    def __init__(self) -> None:
        self._params: dict[str, Tensor] = {}
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}
        self._t: dict[str, int] = {}

    def add(self, name: str, tensor: Tensor) -> Tensor:
        if name in self._params:
            raise DataError(f"duplicate parameter name: {name!r}")
        tensor.requires_grad = True
        self._params[name] = tensor
        self._m[name] = np.zeros_like(tensor.data)
        self._v[name] = np.zeros_like(tensor.data)
        self._t[name] = 0
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def names(self) -> list[str]:
        return list(self._params)

    def items(self) -> Iterator[tuple[str, Tensor]]:
        return iter(self._params.items())

    def zero_grad(self) -> None:
        for t in self._params.values():
            t.grad = None

    def step_count(self, name: str) -> int:
        return self._t[name]


def adam_step(
    store: ParamStore,
    grads: Mapping[str, np.ndarray] | None = None,
    lr: float = 1e-2,
    beta1: float = ADAM_BETA1,
    beta2: float = ADAM_BETA2,
    eps: float = ADAM_EPS,
) -> ParamStore:
    """One bias-corrected adaptive update over every parameter in the store.

    ``grads`` maps parameter name -> gradient array; when omitted, each
    tensor's accumulated ``.grad`` is used (missing/None gradients mean the
    parameter is untouched this step). Deterministic: iteration follows
    insertion order and the update is pure ndarray arithmetic.
    """
    for name, param in store.items():
        if grads is not None:
            g = grads.get(name)
        else:
            g = param.grad
        if g is None:
            continue
        g = np.asarray(g, dtype=np.float64)
        if g.shape != param.data.shape:
            raise DimensionError(
                f"gradient shape {g.shape} does not match parameter {name!r} shape {param.data.shape}"
            )
        store._t[name] += 1
        t = store._t[name]
        m = store._m[name]
        v = store._v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        param.data -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return store
