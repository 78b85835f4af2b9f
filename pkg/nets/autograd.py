# nets/autograd.py - Gradient tape over a ModelState
import logging
from dataclasses import dataclass
from typing import Dict

import torch

from core.errors import NonFiniteError, ShapeError

from .model import ModelState

logger = logging.getLogger(__name__)


@dataclass
class GradientTape:
    """Loss value and one gradient per named parameter of the state"""
    loss: float
    gradients: Dict[str, torch.Tensor]

    def check_shapes(self, state: ModelState):
        for name, param in state.named_parameters():
            grad = self.gradients.get(name)
            if grad is None or grad.shape != param.shape:
                raise ShapeError(f"gradient for {name} does not match parameter shape {tuple(param.shape)}")

    def norm(self) -> float:
        return float(torch.sqrt(sum((g.double() ** 2).sum() for g in self.gradients.values())))


def backward(loss: torch.Tensor, state: ModelState) -> GradientTape:
    """
    Reverse-mode gradients of a scalar loss with respect to every parameter.

    Parameters the loss does not depend on get zero gradients; a constant loss
    gives an all-zero tape.
    """
    if loss.ndim != 0:
        raise ShapeError(f"loss must be a scalar, got shape {tuple(loss.shape)}")
    if not torch.isfinite(loss):
        raise NonFiniteError(f"loss is not finite: {loss.item()}")

    names, params = zip(*state.named_parameters())
    if loss.requires_grad:
        grads = torch.autograd.grad(loss, params, allow_unused=True)
    else:
        grads = (None,) * len(params)

    gradients = {
        name: grad.detach() if grad is not None else torch.zeros_like(param)
        for name, param, grad in zip(names, params, grads)
    }
    return GradientTape(loss=float(loss.detach()), gradients=gradients)


def apply_gradients(tape: GradientTape, state: ModelState, optimizer: torch.optim.Optimizer):
    """Load the tape into .grad and take one optimizer step"""
    for name, param in state.named_parameters():
        param.grad = tape.gradients[name]
    optimizer.step()
    optimizer.zero_grad(set_to_none=True)
