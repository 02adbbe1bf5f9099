"""FFN projections and biaffine pair scoring, with hand-written backprop."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from schemaforge.errors import ContractViolation
from schemaforge.sdp.params import FFN_BLOCKS, SdpParams


def ffn_project(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """relu(x W + b); ``x`` may be a single vector or a row-stacked batch."""
    x = np.asarray(x, dtype=np.float64)
    if W.ndim != 2 or x.shape[-1] != W.shape[0] or b.shape != (W.shape[1],):
        raise ContractViolation(f"ffn dimension mismatch: x {x.shape}, W {W.shape}, b {b.shape}")
    return np.maximum(0.0, x @ W + b)


def ffn_backward(x: np.ndarray, W: np.ndarray, b: np.ndarray, grad_out: np.ndarray):
    """Gradients of ``sum(grad_out * ffn_project(x, W, b))`` wrt x, W, b."""
    x2 = np.atleast_2d(x)
    g2 = np.atleast_2d(grad_out)
    dz = g2 * ((x2 @ W + b) > 0)
    dx = dz @ W.T
    return dx.reshape(np.shape(x)), x2.T @ dz, dz.sum(axis=0)


def biaffine(x1: np.ndarray, x2: np.ndarray, U: np.ndarray, W: np.ndarray, b) -> float | np.ndarray:
    """x1' U x2 + W (x1 ++ x2) + b.

    With ``U`` of shape (L, p, p), ``W`` (L, 2p) and ``b`` (L,) this is the
    stacked label form and returns an L-vector.
    """
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    p = x1.shape[0]
    cat = np.concatenate([x1, x2])
    if U.ndim == 2:
        W = np.ravel(W)
        if U.shape != (p, x2.shape[0]) or W.shape != cat.shape or np.ndim(b) != 0:
            raise ContractViolation(f"biaffine dimension mismatch: U {U.shape}, W {W.shape}")
        return float(x1 @ U @ x2 + W @ cat + b)
    if U.ndim == 3 and U.shape[1:] == (p, x2.shape[0]) and W.shape == (U.shape[0], cat.shape[0]) and np.shape(b) == (U.shape[0],):
        return np.einsum("p,lpq,q->l", x1, U, x2) + W @ cat + b
    raise ContractViolation(f"biaffine dimension mismatch: U {U.shape}, W {np.shape(W)}")


@dataclass
class PairScores:
    edge_logits: np.ndarray  # n x m
    label_logits: np.ndarray  # n x m x L
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.edge_logits.shape


def score_pairs(Q: np.ndarray, S: np.ndarray, params: SdpParams) -> PairScores:
    """Edge and label logits for every (question token, column) pair."""
    if Q.shape[1:] != (params.h,) or S.shape[1:] != (params.h,):
        raise ContractViolation(f"encoder width must be {params.h}: Q {Q.shape}, S {S.shape}")
    p = params.p
    qe = ffn_project(Q, params["edge_dep.W"], params["edge_dep.b"])
    ql = ffn_project(Q, params["label_dep.W"], params["label_dep.b"])
    se = ffn_project(S, params["edge_head.W"], params["edge_head.b"])
    sl = ffn_project(S, params["label_head.W"], params["label_head.b"])

    Ue, We, be = params["edge.U"], params["edge.W"], params["edge.b"]
    edge = qe @ Ue @ se.T + (qe @ We[:p])[:, None] + (se @ We[p:])[None, :] + be

    Ul, Wl, bl = params["label.U"], params["label.W"], params["label.b"]
    n, m, L = ql.shape[0], sl.shape[0], Ul.shape[0]
    # reshaped matmuls instead of einsum: same contraction, far faster
    qU = (ql @ Ul.transpose(1, 0, 2).reshape(p, L * p)).reshape(n, L, p)
    label = (qU.reshape(n * L, p) @ sl.T).reshape(n, L, m).transpose(0, 2, 1)
    label += (ql @ Wl[:, :p].T)[:, None, :] + (sl @ Wl[:, p:].T)[None, :, :] + bl

    cache = {"Q": Q, "S": S, "qe": qe, "ql": ql, "se": se, "sl": sl, "qU": qU}
    return PairScores(edge, label, cache)


def score_pairs_backward(scores: PairScores, d_edge: np.ndarray, d_label: np.ndarray, params: SdpParams) -> dict[str, np.ndarray]:
    """Parameter gradients given upstream gradients on both logit tensors."""
    c = scores._cache
    p = params.p
    qe, ql, se, sl = c["qe"], c["ql"], c["se"], c["sl"]
    Ue, We = params["edge.U"], params["edge.W"]
    Ul, Wl = params["label.U"], params["label.W"]
    g: dict[str, np.ndarray] = {}

    row, col = d_edge.sum(axis=1), d_edge.sum(axis=0)
    g["edge.U"] = qe.T @ d_edge @ se
    g["edge.W"] = np.concatenate([qe.T @ row, se.T @ col])
    g["edge.b"] = np.array(d_edge.sum())
    d_qe = d_edge @ se @ Ue.T + row[:, None] * We[:p]
    d_se = d_edge.T @ qe @ Ue + col[:, None] * We[p:]

    lrow, lcol = d_label.sum(axis=1), d_label.sum(axis=0)  # n x L, m x L
    n, m, L = d_label.shape
    G = (d_label.transpose(0, 2, 1) @ sl).reshape(n, L * p)  # G[i, l, q] = sum_j d[i,j,l] sl[j,q]
    g["label.U"] = (ql.T @ G).reshape(p, L, p).transpose(1, 0, 2)
    g["label.W"] = np.concatenate([lrow.T @ ql, lcol.T @ sl], axis=1)
    g["label.b"] = d_label.sum(axis=(0, 1))
    d_ql = G @ Ul.transpose(0, 2, 1).reshape(L * p, p) + lrow @ Wl[:, :p]
    d_sl = d_label.transpose(1, 0, 2).reshape(m, n * L) @ c["qU"].reshape(n * L, p) + lcol @ Wl[:, p:]

    upstream = {"edge_dep": (c["Q"], d_qe), "label_dep": (c["Q"], d_ql), "edge_head": (c["S"], d_se), "label_head": (c["S"], d_sl)}
    for block in FFN_BLOCKS:
        x, d_out = upstream[block]
        W, b = params[f"{block}.W"], params[f"{block}.b"]
        if x.shape[0] == 0:
            g[f"{block}.W"], g[f"{block}.b"] = np.zeros_like(W), np.zeros_like(b)
            continue
        _, g[f"{block}.W"], g[f"{block}.b"] = ffn_backward(x, W, b, d_out)
    return g


def decide_edges(scores: PairScores | np.ndarray) -> np.ndarray:
    """An edge exists wherever its logit is >= 0."""
    logits = scores.edge_logits if isinstance(scores, PairScores) else np.asarray(scores)
    return logits >= 0
