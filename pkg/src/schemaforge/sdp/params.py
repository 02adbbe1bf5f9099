from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from schemaforge.errors import ContractViolation
from schemaforge.labeling.types import NUM_LABELS

FFN_BLOCKS = ("edge_head", "label_head", "edge_dep", "label_dep")


@dataclass
class SdpParams:
    """Trainable tensors of the biaffine head plus the EPR and toy MLM heads.

    Tensor names: ``<block>.W`` (h x p) and ``<block>.b`` (p) for each FFN
    block; ``edge.U`` (p x p), ``edge.W`` (2p), ``edge.b`` (scalar);
    ``label.U`` (L x p x p), ``label.W`` (L x 2p), ``label.b`` (L);
    ``epr.W`` (h x k_max), ``epr.b``; ``mlm.W`` (h x vocab), ``mlm.b``.
    The loss-balance scalars live outside the tensor dict.
    """

    tensors: dict[str, np.ndarray]
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) <= 0:
            raise ContractViolation("alpha, beta and gamma must be strictly positive")
        h, p = self.h, self.p
        for block in FFN_BLOCKS:
            if self[f"{block}.W"].shape != (h, p) or self[f"{block}.b"].shape != (p,):
                raise ContractViolation(f"FFN block {block} has inconsistent shape")
        expected = {
            "edge.U": (p, p),
            "edge.W": (2 * p,),
            "edge.b": (),
            "label.U": (NUM_LABELS, p, p),
            "label.W": (NUM_LABELS, 2 * p),
            "label.b": (NUM_LABELS,),
        }
        for name, shape in expected.items():
            if self[name].shape != shape:
                raise ContractViolation(f"{name} has shape {self[name].shape}, expected {shape}")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    @property
    def h(self) -> int:
        return self.tensors["edge_head.W"].shape[0]

    @property
    def p(self) -> int:
        return self.tensors["edge_head.W"].shape[1]

    @property
    def k_max(self) -> int:
        return self.tensors["epr.W"].shape[1]

    @property
    def vocab(self) -> int:
        return self.tensors["mlm.W"].shape[1]

    @classmethod
    def init(cls, h: int = 32, p: int = 16, seed: int = 0, k_max: int = 8, vocab: int = 64) -> SdpParams:
        rng = np.random.default_rng(seed)
        t: dict[str, np.ndarray] = {}
        for block in FFN_BLOCKS:
            t[f"{block}.W"] = rng.standard_normal((h, p)) / np.sqrt(h)
            t[f"{block}.b"] = np.full(p, 0.1)
        t["edge.U"] = rng.standard_normal((p, p)) / p
        t["edge.W"] = rng.standard_normal(2 * p) / np.sqrt(2 * p)
        t["edge.b"] = np.array(0.0)
        t["label.U"] = rng.standard_normal((NUM_LABELS, p, p)) / p
        t["label.W"] = rng.standard_normal((NUM_LABELS, 2 * p)) / np.sqrt(2 * p)
        t["label.b"] = np.zeros(NUM_LABELS)
        t["epr.W"] = rng.standard_normal((h, k_max)) / np.sqrt(h)
        t["epr.b"] = np.zeros(k_max)
        t["mlm.W"] = rng.standard_normal((h, vocab)) / np.sqrt(h)
        t["mlm.b"] = np.zeros(vocab)
        return cls(t)

    def copy(self) -> SdpParams:
        return SdpParams({k: v.copy() for k, v in self.tensors.items()}, self.alpha, self.beta, self.gamma)

    def zeros_like(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.tensors.items()}
