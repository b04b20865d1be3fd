import json
import wave

import numpy as np
import pytest


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A small randomly initialized wav2vec2-style encoder saved locally."""
    import torch
    from transformers import Wav2Vec2Config, Wav2Vec2Model

    torch.manual_seed(0)
    config = Wav2Vec2Config(
        hidden_size=16,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=32,
        conv_dim=(16, 16),
        conv_stride=(5, 2),
        conv_kernel=(10, 3),
        num_conv_pos_embeddings=16,
        num_conv_pos_embedding_groups=4,
    )
    model = Wav2Vec2Model(config)
    model.eval()
    path = tmp_path_factory.mktemp("model")
    model.save_pretrained(path)
    return str(path)


def write_wav(path, waveform, rate=16000):
    pcm = np.clip(waveform * 32767.0, -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(rate)
        f.writeframes(pcm.tobytes())


def sine_wave(freq, duration=0.2, rate=16000, amplitude=0.3):
    t = np.arange(int(duration * rate)) / rate
    return (amplitude * np.sin(2 * np.pi * freq * t)).astype(np.float32)


def write_alignment(path, intervals):
    payload = [
        {"start": s, "end": e, "phone": p, "class": c}
        for s, e, p, c in intervals
    ]
    path.write_text(json.dumps(payload))
