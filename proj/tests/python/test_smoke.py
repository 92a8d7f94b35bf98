import math

import numpy as np
import pytest

import dicancel


def test_constellation_roundtrip():
    c = dicancel.Constellation(16)
    assert len(c) == 16
    for k in range(16):
        assert c.demap(c.map(k)) == k
    pts = c.points()
    energy = sum(abs(p) ** 2 for p in pts) / len(pts)
    assert energy == pytest.approx(1.0)
    with pytest.raises(Exception):
        dicancel.Constellation(7)


def test_latency_model():
    assert dicancel.latency_estimate() == pytest.approx(1e-6)
    assert dicancel.latency_estimate(clock_hz=100e6) == pytest.approx(2e-6)


def test_forward_shape_and_finiteness():
    model = dicancel.Canceller(seed=3)
    assert model.parameter_count > 50000
    blocks = np.zeros((2, dicancel.BLOCK_LEN), dtype=np.complex64)
    out = model.forward(blocks)
    assert out.shape == blocks.shape
    assert np.isfinite(out.view(np.float32)).all()


def test_end_to_end_pipeline(tmp_path):
    data = tmp_path / "ds"
    dicancel.generate_dataset(
        data,
        frames=6,
        dims=(1, 8, 64),
        qam=16,
        sir_db=3.0,
        seed=5,
        splits=(3, 1, 2),
    )
    assert (data / "train.dic").is_file()
    assert (data / "manifest.txt").is_file()

    identity = dicancel.evaluate(data)
    assert identity["ser_after"] == identity["ser_before"] > 0.0
    assert len(identity["per_frame_before"]) == 2

    ckpt = tmp_path / "m.dicm"
    res = dicancel.train(data, ckpt, epochs=1, batch=16, seed=3)
    assert res["epochs_run"] == 1
    assert len(res["curve"]) == 2  # untrained point + 1 epoch
    assert math.isfinite(res["best_val_loss"])

    model = dicancel.Canceller.load(ckpt)
    assert model.epochs_run == 1
    assert model.iq_mode == "stacked_iq"

    rep = dicancel.evaluate(data, ckpt)
    assert 0.0 <= rep["ser_after"] <= 1.0

    rows = dicancel.quant_sweep(data, ckpt, bits=[8, 32])
    assert [r["bits"] for r in rows] == [8, 32]
    assert rows[1]["param_bytes"] == 4 * model.parameter_count


def test_calibrate_sir():
    sir = dicancel.calibrate_sir(0.376, qam=16, seed=7, trials=50000)
    assert -10.0 <= sir <= 50.0
