from __future__ import annotations

import math
from collections.abc import Sequence
from typing import NamedTuple

import numpy as np

from schemaforge.errors import ContractViolation
from schemaforge.labeling.types import LIMIT_HEAD, DependencyGraph
from schemaforge.schema import ColumnRef
from schemaforge.sdp.biaffine import PairScores, score_pairs, score_pairs_backward
from schemaforge.sdp.params import SdpParams


def sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def log_softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = z - z.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


def softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    e = np.exp(z - z.max(axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


def gold_matrices(graph: DependencyGraph, n: int, columns: Sequence[ColumnRef]) -> tuple[np.ndarray, np.ndarray]:
    """Token-level gold from span edges.

    ``edge_gold[i, j]`` is 1 when token i lies in any edge span headed by
    column j. ``label_gold[i, j]`` is the label index of the highest-scoring
    such edge (ties: earlier label in the type inventory), 0 (None) otherwise.
    Edges on the LIMIT pseudo-head have no column and are skipped.
    """
    index = {ref: j for j, ref in enumerate(columns)}
    edge_gold = np.zeros((n, len(columns)))
    label_gold = np.zeros((n, len(columns)), dtype=np.int64)
    best: dict[tuple[int, int], tuple[float, int]] = {}
    for edge in graph:
        if edge.head == LIMIT_HEAD or edge.head not in index:
            continue
        j = index[edge.head]
        for i in range(*edge.span):
            if i >= n:
                raise ContractViolation(f"edge span {edge.span} exceeds question length {n}")
            edge_gold[i, j] = 1.0
            cand = (edge.score, -edge.label.index)
            if (i, j) not in best or cand > best[(i, j)]:
                best[(i, j)] = cand
                label_gold[i, j] = edge.label.index
    return edge_gold, label_gold


class SdpLoss(NamedTuple):
    value: float
    edge_term: float
    label_term: float
    d_edge: np.ndarray
    d_label: np.ndarray


def sdp_loss(scores: PairScores, edge_gold: np.ndarray, label_gold: np.ndarray) -> SdpLoss:
    """Mean edge BCE-with-logits plus mean 17-way label cross-entropy.

    Both terms average over all n*m pairs; non-edge pairs carry the None
    label. Gradients are with respect to the two logit tensors.
    """
    s = scores.edge_logits
    z = scores.label_logits
    n_pairs = s.size
    if n_pairs == 0:
        return SdpLoss(0.0, 0.0, 0.0, np.zeros_like(s), np.zeros_like(z))
    edge_term = float(np.mean(np.logaddexp(0.0, s) - edge_gold * s))
    d_edge = (sigmoid(s) - edge_gold) / n_pairs

    logp = log_softmax(z)
    picked = np.take_along_axis(logp, label_gold[..., None], axis=-1)[..., 0]
    label_term = float(-np.mean(picked))
    d_label = np.exp(logp)
    np.put_along_axis(d_label, label_gold[..., None], np.take_along_axis(d_label, label_gold[..., None], -1) - 1.0, -1)
    d_label /= n_pairs
    return SdpLoss(edge_term + label_term, edge_term, label_term, d_edge, d_label)


def label_probabilities(scores: PairScores) -> np.ndarray:
    return softmax(scores.label_logits)


def sdp_objective(Q, S, params: SdpParams, edge_gold, label_gold) -> tuple[float, dict[str, np.ndarray], PairScores]:
    """Score, compute the SDP loss and backpropagate into the biaffine head."""
    scores = score_pairs(Q, S, params)
    loss = sdp_loss(scores, edge_gold, label_gold)
    grads = score_pairs_backward(scores, loss.d_edge, loss.d_label, params)
    return loss.value, grads, scores


def epr_loss(slot_logits: np.ndarray, target: Sequence[int]) -> tuple[float, np.ndarray]:
    """Mean K-way cross-entropy of per-slot original-rank predictions."""
    slot_logits = np.asarray(slot_logits, dtype=np.float64)
    k = len(target)
    if k == 0:
        return 0.0, np.zeros_like(slot_logits)
    if slot_logits.shape != (k, k) or sorted(target) != list(range(k)):
        raise ContractViolation("EPR needs K x K logits and a permutation target")
    tgt = np.asarray(target)
    logp = log_softmax(slot_logits)
    loss = float(-np.mean(logp[np.arange(k), tgt]))
    grad = np.exp(logp)
    grad[np.arange(k), tgt] -= 1.0
    return loss, grad / k


def epr_objective(E: np.ndarray, target: Sequence[int], params: SdpParams) -> tuple[float, dict[str, np.ndarray]]:
    """Rank classifier over entity first-token vectors ``E`` (K x h)."""
    k = len(target)
    W, b = params["epr.W"], params["epr.b"]
    gW, gb = np.zeros_like(W), np.zeros_like(b)
    if k == 0:
        return 0.0, {"epr.W": gW, "epr.b": gb}
    if k > params.k_max:
        raise ContractViolation(f"{k} entities exceed the rank classifier size {params.k_max}")
    logits = E @ W[:, :k] + b[:k]
    loss, d = epr_loss(logits, target)
    gW[:, :k] = E.T @ d
    gb[:k] = d.sum(axis=0)
    return loss, {"epr.W": gW, "epr.b": gb}


def mlm_objective(H: np.ndarray, target_ids: Sequence[int], params: SdpParams) -> tuple[float, dict[str, np.ndarray]]:
    """Toy token recovery: softmax over a hashed vocabulary at masked rows ``H``."""
    W, b = params["mlm.W"], params["mlm.b"]
    t = len(target_ids)
    if t == 0:
        return 0.0, {"mlm.W": np.zeros_like(W), "mlm.b": np.zeros_like(b)}
    ids = np.asarray(target_ids)
    logp = log_softmax(H @ W + b)
    loss = float(-np.mean(logp[np.arange(t), ids]))
    d = np.exp(logp)
    d[np.arange(t), ids] -= 1.0
    d /= t
    return loss, {"mlm.W": H.T @ d, "mlm.b": d.sum(axis=0)}


class JointLoss(NamedTuple):
    value: float
    d_alpha: float
    d_beta: float
    d_gamma: float
    # dL/dL_task, the factors applied to each task's gradients
    w_mlm: float
    w_sdp: float
    w_epr: float


def joint_loss(l_mlm: float, l_sdp: float, l_epr: float, alpha: float, beta: float, gamma: float) -> JointLoss:
    """L = L_mlm/(2a^2) + L_sdp/(2b^2) + L_epr/(2g^2) + log(a*b*g)."""
    if min(alpha, beta, gamma) <= 0:
        raise ContractViolation("balance scalars must be strictly positive")
    terms = []
    derivs = []
    weights = []
    for loss, s in ((l_mlm, alpha), (l_sdp, beta), (l_epr, gamma)):
        terms.append(loss / (2.0 * s * s))
        terms.append(math.log(s))
        derivs.append(-loss / s**3 + 1.0 / s)
        weights.append(1.0 / (2.0 * s * s))
    # fsum makes the value independent of task order
    return JointLoss(math.fsum(terms), *derivs, *weights)

