"""
Linear classification heads.

A flat head produces softmax(Wx + b) over K classes. A hierarchical head
has P + C outputs: the first P are parent activations, normalized with one
softmax into P(parent); the remaining C are child activations, normalized
with a softmax inside each sibling group into P(child | parent). The joint
probability of a (parent, child) pair is their product. Because each child
has exactly one parent, joint tables are indexed by child id.

Losses are the mean negative log probability of the true label; gradients
are analytic.
"""
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from src.core.errors import ConfigError, DimensionError, LabelError
from src.models.hierarchy import Hierarchy


@dataclass
class LinearHead:
    """
    Weights and bias of a linear head plus its output mode.

    Exactly one of ``num_classes`` (flat) and ``hierarchy`` is set.
    """

    weights: np.ndarray
    bias: np.ndarray
    num_classes: Optional[int] = None
    hierarchy: Optional[Hierarchy] = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if (self.num_classes is None) == (self.hierarchy is None):
            raise ConfigError("A head is either flat (num_classes) or hierarchical (hierarchy)")
        out = self.num_outputs
        if self.weights.ndim != 2 or self.weights.shape[0] != out or self.bias.shape != (out,):
            raise DimensionError(
                f"Head with {out} outputs got weights {self.weights.shape} and bias {self.bias.shape}"
            )
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise DimensionError("Head parameters must be finite")

    @classmethod
    def zeros(cls, in_dim: int, num_classes: Optional[int] = None,
              hierarchy: Optional[Hierarchy] = None) -> "LinearHead":
        out = hierarchy.num_outputs if hierarchy is not None else num_classes
        return cls(np.zeros((out, in_dim)), np.zeros(out), num_classes, hierarchy)

    @property
    def mode(self) -> str:
        return "hier" if self.hierarchy is not None else "flat"

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def num_outputs(self) -> int:
        if self.hierarchy is not None:
            return self.hierarchy.num_outputs
        return int(self.num_classes)

    @property
    def num_labels(self) -> int:
        """Size of the label space scored at evaluation (children for hierarchical heads)."""
        if self.hierarchy is not None:
            return self.hierarchy.num_children
        return int(self.num_classes)

    def logits(self, x: np.ndarray) -> np.ndarray:
        """Raw activations Wx + b for a vector or an (n, in) batch."""
        inputs = np.asarray(x, dtype=np.float64)
        if inputs.shape[-1] != self.in_dim or inputs.ndim not in (1, 2):
            raise DimensionError(f"Head expects inputs of length {self.in_dim}, got shape {inputs.shape}")
        return inputs @ self.weights.T + self.bias

    def copy(self) -> "LinearHead":
        return LinearHead(self.weights.copy(), self.bias.copy(), self.num_classes, self.hierarchy)


class HierProbs(NamedTuple):
    """Hierarchical head outputs; child-indexed arrays have C entries."""

    parent: np.ndarray
    conditional: np.ndarray
    joint: np.ndarray


class HeadGrads(NamedTuple):
    weights: np.ndarray
    bias: np.ndarray


def _log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _group_log_softmax(z: np.ndarray, hierarchy: Hierarchy) -> np.ndarray:
    """Log-softmax of child activations within each sibling group; z is (n, C)."""
    out = np.empty_like(z)
    for children in hierarchy.children_of:
        cols = list(children)
        out[:, cols] = _log_softmax(z[:, cols])
    return out


def _hier_log_probs(h: LinearHead, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    P = h.hierarchy.num_parents
    log_parent = _log_softmax(z[:, :P])
    log_cond = _group_log_softmax(z[:, P:], h.hierarchy)
    return log_parent, log_cond


def _as_batch(x: np.ndarray) -> Tuple[np.ndarray, bool]:
    inputs = np.asarray(x, dtype=np.float64)
    return (inputs[np.newaxis, :], True) if inputs.ndim == 1 else (inputs, False)


def forward_flat(h: LinearHead, x: np.ndarray) -> np.ndarray:
    """softmax(Wx + b), with max subtraction; accepts a vector or a batch."""
    if h.hierarchy is not None:
        raise ConfigError("forward_flat needs a flat head")
    inputs, single = _as_batch(x)
    probs = np.exp(_log_softmax(h.logits(inputs)))
    return probs[0] if single else probs


def forward_hier(h: LinearHead, x: np.ndarray) -> HierProbs:
    """Parent, conditional child and joint probabilities of a hierarchical head."""
    if h.hierarchy is None:
        raise ConfigError("forward_hier needs a hierarchical head")
    inputs, single = _as_batch(x)
    log_parent, log_cond = _hier_log_probs(h, h.logits(inputs))
    parent = np.exp(log_parent)
    cond = np.exp(log_cond)
    joint = np.exp(log_parent[:, h.hierarchy.parent_index] + log_cond)
    if single:
        return HierProbs(parent[0], cond[0], joint[0])
    return HierProbs(parent, cond, joint)


def label_scores(h: LinearHead, x: np.ndarray) -> np.ndarray:
    """Probabilities over the evaluated label space (joint over children for hierarchical heads)."""
    if h.hierarchy is None:
        return forward_flat(h, x)
    return forward_hier(h, x).joint


def label_activations(h: LinearHead, x: np.ndarray) -> np.ndarray:
    """
    Pre-softmax scores over the label space, as used by late fusion.

    Flat heads return Wx + b. Hierarchical heads return log joint
    probabilities, which order children exactly like the joint table.
    """
    inputs, single = _as_batch(x)
    if h.hierarchy is None:
        z = h.logits(inputs)
    else:
        log_parent, log_cond = _hier_log_probs(h, h.logits(inputs))
        z = log_parent[:, h.hierarchy.parent_index] + log_cond
    return z[0] if single else z


def check_labels(h: LinearHead, labels: np.ndarray) -> np.ndarray:
    """
    Validate a label array for the head's mode.

    Flat heads take shape (n,) class ids; hierarchical heads take (n, 2)
    rows of (parent, child).
    """
    y = np.asarray(labels, dtype=np.int64)
    if h.hierarchy is None:
        if y.ndim != 1:
            raise LabelError(f"Flat labels must be a 1-D array of class ids, got shape {y.shape}")
        bad = y[(y < 0) | (y >= h.num_classes)]
        if bad.size:
            raise LabelError(f"Class ids {sorted(set(bad.tolist()))} outside [0, {h.num_classes})")
        return y
    if y.ndim != 2 or y.shape[1] != 2:
        raise LabelError(f"Hierarchical labels must be (parent, child) rows, got shape {y.shape}")
    for parent, child in y:
        h.hierarchy.check_label(int(parent), int(child))
    return y


def loss_and_grad(h: LinearHead, x: np.ndarray, labels: np.ndarray) -> Tuple[float, HeadGrads]:
    """
    Mean cross-entropy of a batch and its exact gradients.

    For hierarchical heads the per-sample loss is
    -log P(parent) - log P(child | parent); the parent softmax and the
    true sibling group's softmax contribute additive gradient terms.

    Args:
        h: The head
        x: (n, in) batch
        labels: (n,) class ids or (n, 2) (parent, child) rows
    """
    inputs, _ = _as_batch(x)
    y = check_labels(h, labels)
    n = inputs.shape[0]
    if y.shape[0] != n:
        raise DimensionError(f"{n} inputs but {y.shape[0]} labels")
    z = h.logits(inputs)
    rows = np.arange(n)

    if h.hierarchy is None:
        log_p = _log_softmax(z)
        loss = -log_p[rows, y].mean()
        dz = np.exp(log_p)
        dz[rows, y] -= 1.0
    else:
        P = h.hierarchy.num_parents
        parents, children = y[:, 0], y[:, 1]
        log_parent, log_cond = _hier_log_probs(h, z)
        loss = -(log_parent[rows, parents] + log_cond[rows, children]).mean()

        dz = np.zeros_like(z)
        dz[:, :P] = np.exp(log_parent)
        dz[rows, parents] -= 1.0
        # only the true parent's sibling group receives child gradient
        in_group = h.hierarchy.parent_index[np.newaxis, :] == parents[:, np.newaxis]
        dz[:, P:] = np.where(in_group, np.exp(log_cond), 0.0)
        dz[rows, P + children] -= 1.0

    dz /= n
    return float(loss), HeadGrads(dz.T @ inputs, dz.sum(axis=0))
