"""Biaffine schema-dependency head, its losses and a toy training loop."""

from schemaforge.sdp.biaffine import PairScores, biaffine, decide_edges, ffn_backward, ffn_project, score_pairs, score_pairs_backward
from schemaforge.sdp.encoder import encode_tokens, toy_encode
from schemaforge.sdp.losses import (
    JointLoss,
    SdpLoss,
    epr_loss,
    epr_objective,
    gold_matrices,
    joint_loss,
    label_probabilities,
    mlm_objective,
    sdp_loss,
    sdp_objective,
)
from schemaforge.sdp.params import SdpParams
from schemaforge.sdp.train import TRACE_COLUMNS, DemoResult, TraceRow, train_demo

__all__ = [
    "DemoResult",
    "JointLoss",
    "PairScores",
    "SdpLoss",
    "SdpParams",
    "TRACE_COLUMNS",
    "TraceRow",
    "biaffine",
    "decide_edges",
    "encode_tokens",
    "epr_loss",
    "epr_objective",
    "ffn_backward",
    "ffn_project",
    "gold_matrices",
    "joint_loss",
    "label_probabilities",
    "mlm_objective",
    "score_pairs",
    "score_pairs_backward",
    "sdp_loss",
    "sdp_objective",
    "toy_encode",
    "train_demo",
]
