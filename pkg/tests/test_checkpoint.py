"""Checkpoint format: byte round-trips, header/spec coupling, corruption."""

import numpy as np
import pytest

from tiltxter.tiltnet import CheckpointError, ModelSpec, TiltNet, load_model, save_model


def train_a_little(model, steps=3):
    """Nudge parameters and batchnorm stats away from initialization."""
    from tiltxter.tiltnet import SgdMomentum, cross_entropy

    rng = np.random.default_rng(0)
    opt = SgdMomentum(lr=0.05)
    for _ in range(steps):
        x = rng.uniform(0, 9, (4, 2, 10, 10))
        y = rng.integers(0, 9, 4)
        logits, caches = model.forward(x, training=True)
        _, dlogits = cross_entropy(logits, y)
        grads = model.backward(dlogits, caches)
        opt.step(model.params, {k: grads[k] for k in model.params})
    return model


class TestRoundTrip:
    def test_params_and_running_stats_survive(self, tmp_path):
        model = train_a_little(TiltNet(seed=3))
        path = tmp_path / "m.ckpt"
        save_model(model, path)
        loaded = load_model(path)
        for key in model.params:
            assert np.array_equal(loaded.params[key], model.params[key]), key
        for bn in ("bn1", "bn2"):
            assert np.array_equal(loaded.bn_states[bn].running_mean,
                                  model.bn_states[bn].running_mean)
            assert np.array_equal(loaded.bn_states[bn].running_var,
                                  model.bn_states[bn].running_var)
        assert loaded.spec == model.spec

    def test_inference_identical_after_reload(self, tmp_path):
        model = train_a_little(TiltNet(seed=4))
        path = tmp_path / "m.ckpt"
        save_model(model, path)
        loaded = load_model(path)
        x = np.random.default_rng(1).uniform(0, 9, (5, 2, 10, 10))
        assert np.array_equal(loaded.forward(x)[0], model.forward(x)[0])

    def test_save_deterministic(self, tmp_path):
        model = TiltNet(seed=5)
        a, b = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
        save_model(model, a)
        save_model(model, b)
        assert a.read_bytes() == b.read_bytes()


class TestHeader:
    def test_spec_changes_the_header(self, tmp_path):
        small = ModelSpec(conv_channels=(4, 8), hidden=(64, 32, 16))
        p1, p2 = tmp_path / "default.ckpt", tmp_path / "small.ckpt"
        save_model(TiltNet(seed=0), p1)
        save_model(TiltNet(small, seed=0), p2)
        head1, head2 = p1.read_bytes()[:80], p2.read_bytes()[:80]
        assert head1 != head2
        assert load_model(p2).spec == small


class TestCorruption:
    def _saved(self, tmp_path):
        path = tmp_path / "m.ckpt"
        save_model(TiltNet(seed=6), path)
        return path

    def test_bad_magic(self, tmp_path):
        path = self._saved(tmp_path)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"NOPE"
        path.write_bytes(bytes(blob))
        with pytest.raises(CheckpointError, match="magic"):
            load_model(path)

    def test_flipped_parameter_byte_fails_checksum(self, tmp_path):
        path = self._saved(tmp_path)
        blob = bytearray(path.read_bytes())
        blob[len(blob) // 2] ^= 0x01
        path.write_bytes(bytes(blob))
        with pytest.raises(CheckpointError, match="checksum"):
            load_model(path)

    def test_truncation_rejected(self, tmp_path):
        path = self._saved(tmp_path)
        path.write_bytes(path.read_bytes()[:-100])
        with pytest.raises(CheckpointError):
            load_model(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        import struct
        import zlib

        path = self._saved(tmp_path)
        blob = path.read_bytes()
        # keep the checksum honest about the padded payload
        payload = blob[4:-4] + bytes(8)
        path.write_bytes(blob[:4] + payload + struct.pack("<I", zlib.crc32(payload)))
        with pytest.raises(CheckpointError, match="trailing"):
            load_model(path)

    def test_unknown_version(self, tmp_path):
        import struct
        import zlib

        path = self._saved(tmp_path)
        blob = bytearray(path.read_bytes())
        payload = bytearray(blob[4:-4])
        struct.pack_into("<H", payload, 0, 9)
        path.write_bytes(bytes(blob[:4]) + bytes(payload)
                         + struct.pack("<I", zlib.crc32(bytes(payload))))
        with pytest.raises(CheckpointError, match="version"):
            load_model(path)
