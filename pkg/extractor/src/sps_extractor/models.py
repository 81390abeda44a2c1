"""Model loading, the byte-level fallback tokenizer, and layer resolution."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import torch

from .errors import JobError

BOS_ID = 256
EOS_ID = 257
BYTE_VOCAB = 258


class ByteTokenizer:
    """UTF-8 bytes as token ids 0..255, BOS 256, EOS 257.

    Used for models without shipped tokenizer files (the locally built tiny
    model in particular); encode/decode mirror the slice of the HF tokenizer
    API the jobs need.
    """

    bos_token_id = BOS_ID
    eos_token_id = EOS_ID

    def encode(self, text: str, add_special_tokens: bool = False) -> list[int]:
        ids = list(text.encode("utf-8"))
        return [BOS_ID] + ids if add_special_tokens else ids

    def decode(self, ids, skip_special_tokens: bool = True) -> str:
        payload = bytes(i for i in ids if int(i) < 256)
        return payload.decode("utf-8", errors="replace")


@dataclass
class ModelBundle:
    model: torch.nn.Module
    tokenizer: object
    model_id: str
    hidden_size: int
    n_layers: int
    native_dtype: str
    max_positions: Optional[int]


def make_tiny_model(out_dir, seed: int = 0, dim: int = 64, layers: int = 2, heads: int = 2) -> str:
    """Build a small GPT-2-architecture causal LM with deterministic weights.

    Stands in for a downloadable test model when the environment is offline;
    the byte-level tokenizer is implied (no tokenizer files are written).
    """
    from transformers import GPT2Config, GPT2LMHeadModel

    torch.manual_seed(seed)
    config = GPT2Config(
        vocab_size=BYTE_VOCAB,
        n_positions=512,
        n_embd=dim,
        n_layer=layers,
        n_head=heads,
        bos_token_id=BOS_ID,
        eos_token_id=EOS_ID,
    )
    model = GPT2LMHeadModel(config)
    os.makedirs(out_dir, exist_ok=True)
    model.save_pretrained(out_dir)
    return os.fspath(out_dir)


def load_bundle(model_id: str) -> ModelBundle:
    """Load a causal LM plus a tokenizer, falling back to byte-level."""
    from transformers import AutoModelForCausalLM, AutoTokenizer

    try:
        model = AutoModelForCausalLM.from_pretrained(model_id)
    except Exception as e:
        raise JobError(f"cannot load model {model_id!r}: {e}") from e
    model.eval()
    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        # a dir without tokenizer files can yield an empty-vocab tokenizer
        if not tokenizer.encode("probe", add_special_tokens=False):
            tokenizer = ByteTokenizer()
    except Exception:
        tokenizer = ByteTokenizer()
    config = model.config
    hidden = getattr(config, "hidden_size", None) or getattr(config, "n_embd")
    n_layers = getattr(config, "num_hidden_layers", None) or getattr(config, "n_layer")
    max_pos = getattr(config, "max_position_embeddings", None) or getattr(
        config, "n_positions", None
    )
    dtype = str(next(model.parameters()).dtype).replace("torch.", "")
    return ModelBundle(
        model=model,
        tokenizer=tokenizer,
        model_id=model_id,
        hidden_size=int(hidden),
        n_layers=int(n_layers),
        native_dtype=dtype,
        max_positions=int(max_pos) if max_pos else None,
    )


def resolve_layer(layer, n_layers: int) -> int:
    """Map a layer spec onto an index into the hidden_states tuple.

    hidden_states[0] is the embedding output and hidden_states[i] the output
    of block i, so "penultimate" is index n_layers - 1 (the residual stream
    after block L-1, before the final block).
    """
    if isinstance(layer, str):
        name = layer.lower()
        if name == "penultimate":
            return n_layers - 1
        if name == "last":
            return n_layers
        try:
            layer = int(name)
        except ValueError:
            raise JobError(f"unknown layer spec {layer!r}") from None
    idx = int(layer)
    if not (0 <= idx <= n_layers):
        raise JobError(f"layer index {idx} out of range for a {n_layers}-layer model")
    return idx
