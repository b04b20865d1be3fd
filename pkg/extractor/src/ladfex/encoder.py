"""Pretrained-encoder wrapper: per-layer hidden states for a waveform.

"Layer i" is the output of transformer block i (1-based); the
pre-transformer convolutional/embedding output is excluded. Models are run
in evaluation mode under no_grad, so identical audio gives identical
features.
"""

from __future__ import annotations

import numpy as np

from .errors import ModelMismatch


class Encoder:
    def __init__(self, model_path: str):
        import torch
        from transformers import AutoModel

        self._torch = torch
        self.model = AutoModel.from_pretrained(model_path)
        self.model.eval()
        self.model_name = getattr(self.model.config, "model_type", "unknown")

    def hidden_states(self, waveform: np.ndarray) -> np.ndarray:
        """(L, frames, D) float32 block outputs for a mono waveform."""
        torch = self._torch
        wav = torch.from_numpy(np.asarray(waveform, dtype=np.float32))[None]
        with torch.no_grad():
            out = self.model(wav, output_hidden_states=True)
        # hidden_states[0] is the pre-transformer embedding; blocks follow
        blocks = out.hidden_states[1:]
        return np.stack([h[0].cpu().numpy() for h in blocks]).astype(np.float32)

    def check_geometry(self, expected_layers: int, expected_dim: int) -> None:
        layers = self.model.config.num_hidden_layers
        dim = self.model.config.hidden_size
        if layers != expected_layers or dim != expected_dim:
            raise ModelMismatch(
                f"model has {layers} blocks of width {dim}, manifest expects "
                f"{expected_layers} x {expected_dim}"
            )
