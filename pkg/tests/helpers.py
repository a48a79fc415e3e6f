"""Shared builders for model-level tests."""

from __future__ import annotations

import numpy as np

from structgnn import autodiff as ad
from structgnn.encoders import Config, StructGNN, collate
from structgnn.training import masked_multitask_loss

GRAD_BATCH = ["CC(=O)O", "c1ccccc1N", "CS(N)(=O)=O", "O=C1OCCC1"]


def small_config(**kw) -> Config:
    base = dict(hidden_dim=4, message_steps=3, struct_hidden_dim=3, head_hidden_dim=4, tasks=("logp", "logd"), seed=3)
    base.update(kw)
    return Config(**base)


def multitask_grad_error(config: Config | None = None, smiles=GRAD_BATCH) -> float:
    """Max relative error of the full masked multitask loss over every parameter element."""
    model = StructGNN(config or small_config())
    batch = collate([model.featurize(s) for s in smiles])
    y = np.array([[0.5, -1.0], [1.2, 0.0], [-0.3, 0.7], [0.1, 0.2]])
    mask = np.array([[1, 1], [1, 0], [0, 1], [1, 1]], dtype=float)

    def f():
        return masked_multitask_loss(model.forward(batch), y, mask)

    return ad.grad_check(f, model.parameters())
