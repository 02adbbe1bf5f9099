"""Desk-scale training loop: plain gradient descent on the joint objective
over curriculum-sampled batches. A mechanism check, not a pre-trainer."""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import asdict, dataclass

import numpy as np

from schemaforge.curriculum import CurriculumState, batch_seed, compute_difficulties, sample_batch
from schemaforge.errors import ContractViolation
from schemaforge.example import PretrainExample, derive_seed
from schemaforge.objectives import apply_mask_plan, perturb_entities, plan_objectives
from schemaforge.schema import Schema
from schemaforge.sdp.biaffine import decide_edges
from schemaforge.sdp.encoder import encode_tokens, toy_encode
from schemaforge.sdp.losses import epr_objective, gold_matrices, joint_loss, mlm_objective, sdp_objective
from schemaforge.sdp.params import SdpParams
from schemaforge.text import serialize_input

log = logging.getLogger(__name__)

MAX_DEMO_EXAMPLES = 64
SCALAR_FLOOR = 0.5
TRACE_COLUMNS = ("step", "l_mlm", "l_sdp", "l_epr", "joint", "alpha", "beta", "gamma", "edge_f1")


def token_bucket(token: str, vocab: int) -> int:
    return derive_seed(0, token) % vocab


@dataclass
class _Prepared:
    Q: np.ndarray
    S: np.ndarray
    edge_gold: np.ndarray
    label_gold: np.ndarray
    H_mlm: np.ndarray
    mlm_ids: list[int]
    E_epr: np.ndarray
    epr_target: tuple[int, ...]


def _prepare(ex: PretrainExample, schema: Schema, params: SdpParams, seed: int, mlm_ratio: float, value_prob: float) -> _Prepared:
    if ex.dependencies is None:
        raise ContractViolation(f"{ex.example_id}: train_demo needs labeled examples")
    h = params.h
    clean = serialize_input(ex.question, schema)
    Q, S = toy_encode(clean, h, seed)
    edge_gold, label_gold = gold_matrices(ex.dependencies, len(ex.question.tokens), schema.column_refs)

    plan = plan_objectives(ex, schema, mlm_ratio, value_prob, seed)
    masked, targets = apply_mask_plan(ex, schema, plan)
    hidden = encode_tokens(masked.tokens, h, seed)
    H_mlm = hidden[[pos for pos, _ in targets]].reshape(len(targets), h)
    mlm_ids = [token_bucket(tok, params.vocab) for _, tok in targets]

    pert = perturb_entities(ex, derive_seed(derive_seed(seed, ex.example_id), "epr"))
    target = pert.recovery_target
    if len(target) > params.k_max:
        log.warning("%s: %d entities exceed k_max=%d, EPR skipped", ex.example_id, len(target), params.k_max)
        target = ()
    shuffled = serialize_input(pert.shuffled_tokens, schema)
    hidden = encode_tokens(shuffled.tokens, h, seed)
    q0 = shuffled.question_span[0]
    rows = [q0 + s for s, _ in pert.entity_spans_shuffled[: len(target)]]
    E = hidden[rows].reshape(len(rows), h)
    return _Prepared(Q, S, edge_gold, label_gold, H_mlm, mlm_ids, E, target)


@dataclass(frozen=True)
class TraceRow:
    step: int
    l_mlm: float
    l_sdp: float
    l_epr: float
    joint: float
    alpha: float
    beta: float
    gamma: float
    edge_f1: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class DemoResult:
    trace: list[TraceRow]
    final_f1: float
    params: SdpParams


def edge_f1(pred: np.ndarray, gold: np.ndarray) -> tuple[int, int, int]:
    gold = gold.astype(bool)
    return int((pred & gold).sum()), int((pred & ~gold).sum()), int((~pred & gold).sum())


def _f1(tp: int, fp: int, fn: int) -> float:
    den = 2 * tp + fp + fn
    return 1.0 if den == 0 else 2 * tp / den


def evaluate_edges(prepared: Sequence[_Prepared], params: SdpParams) -> float:
    from schemaforge.sdp.biaffine import score_pairs

    tp = fp = fn = 0
    for item in prepared:
        a, b, c = edge_f1(decide_edges(score_pairs(item.Q, item.S, params)), item.edge_gold)
        tp, fp, fn = tp + a, fp + b, fn + c
    return _f1(tp, fp, fn)


def train_demo(
    examples: Sequence[PretrainExample],
    schemas: Mapping[str, Schema],
    steps: int = 300,
    lr: float = 0.3,
    seed: int = 0,
    h: int = 32,
    p: int = 16,
    batch_size: int | None = None,
    mlm_ratio: float = 0.25,
    value_prob: float = 0.25,
    scalar_floor: float = SCALAR_FLOOR,
) -> DemoResult:
    """Fit :class:`SdpParams` to a small labeled slice.

    Batches come from :func:`sample_batch` with T = ``steps``. The balance
    scalars are updated in log space and clipped below at ``scalar_floor``:
    as a task loss approaches zero its unclipped scalar follows sqrt(loss)
    and the task's effective step size 1/(2 s^2) grows without bound, which
    makes plain gradient descent diverge late in training. Each trace row
    reports the losses and the batch edge F1 before that step's update.
    """
    if not examples or len(examples) > MAX_DEMO_EXAMPLES:
        raise ContractViolation(f"train_demo takes 1..{MAX_DEMO_EXAMPLES} examples, got {len(examples)}")
    if steps < 1:
        raise ContractViolation("steps must be >= 1")
    if lr < 0 or scalar_floor <= 0:
        raise ContractViolation("lr must be >= 0 and scalar_floor > 0")
    params = SdpParams.init(h, p, seed)
    prepared = [
        _prepare(ex, schemas[ex.schema_id], params, seed, mlm_ratio, value_prob) for ex in examples
    ]
    difficulties = [ex.difficulty for ex in examples]
    if any(d is None for d in difficulties):
        difficulties = compute_difficulties(examples, schemas)
    state = CurriculumState(tuple(difficulties), T=steps)
    batch_size = batch_size or len(examples)

    trace = []
    for t in range(steps):
        batch = sorted(sample_batch(state.at(t), batch_size, batch_seed(seed, t)))
        grads = {task: params.zeros_like() for task in ("mlm", "sdp", "epr")}
        losses = {task: [] for task in grads}
        tp = fp = fn = 0
        for i in batch:
            item = prepared[i]
            l_sdp, g_sdp, scores = sdp_objective(item.Q, item.S, params, item.edge_gold, item.label_gold)
            l_mlm, g_mlm = mlm_objective(item.H_mlm, item.mlm_ids, params)
            l_epr, g_epr = epr_objective(item.E_epr, item.epr_target, params)
            for task, loss, g in (("mlm", l_mlm, g_mlm), ("sdp", l_sdp, g_sdp), ("epr", l_epr, g_epr)):
                losses[task].append(loss)
                for name, value in g.items():
                    grads[task][name] += value
            a, b, c = edge_f1(decide_edges(scores), item.edge_gold)
            tp, fp, fn = tp + a, fp + b, fn + c
        k = len(batch)
        means = {task: math.fsum(v) / k for task, v in losses.items()}
        jl = joint_loss(means["mlm"], means["sdp"], means["epr"], params.alpha, params.beta, params.gamma)
        trace.append(
            TraceRow(t, means["mlm"], means["sdp"], means["epr"], jl.value, params.alpha, params.beta, params.gamma, _f1(tp, fp, fn))
        )
        if lr == 0:
            continue
        weights = {"mlm": jl.w_mlm, "sdp": jl.w_sdp, "epr": jl.w_epr}
        for name, tensor in params.tensors.items():
            step = sum(weights[task] * grads[task][name] for task in grads) / k
            tensor -= lr * step
        params.alpha = max(scalar_floor, params.alpha * math.exp(-lr * params.alpha * jl.d_alpha))
        params.beta = max(scalar_floor, params.beta * math.exp(-lr * params.beta * jl.d_beta))
        params.gamma = max(scalar_floor, params.gamma * math.exp(-lr * params.gamma * jl.d_gamma))

    return DemoResult(trace, evaluate_edges(prepared, params), params)
