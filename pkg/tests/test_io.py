import numpy as np
import pytest

from l1ae import io
from l1ae.model import HistoryRow, L1AEModel


def test_matrix_round_trip_bit_exact(tmp_path, rng):
    M = rng.standard_normal((7, 13))
    M[0, 0] = np.nextafter(1.0, 2.0)
    io.write_matrix(tmp_path / "a.mat", M)
    back = io.read_matrix(tmp_path / "a.mat")
    assert back.tobytes() == M.tobytes()
    raw = (tmp_path / "a.mat").read_bytes()
    assert raw.startswith(b"L1AE-MAT 1 7 13\n")
    assert len(raw) == len(b"L1AE-MAT 1 7 13\n") + 7 * 13 * 8


def test_matrix_payload_little_endian(tmp_path):
    io.write_matrix(tmp_path / "a.mat", np.array([[1.0, 2.0]]))
    payload = (tmp_path / "a.mat").read_bytes().split(b"\n", 1)[1]
    assert payload == np.array([1.0, 2.0], dtype="<f8").tobytes()


@pytest.mark.parametrize("content", [
    b"L1AE-MAT 2 1 1\n" + bytes(8),
    b"L1AE-MAT 1 2 2\n" + bytes(8),
    b"L1AE-MAT 1 1 1\n" + bytes(9),
    b"NOPE 1 1 1\n" + bytes(8),
    b"L1AE-MAT 1 x 1\n" + bytes(8),
])
def test_matrix_bad_files(tmp_path, content):
    (tmp_path / "bad.mat").write_bytes(content)
    with pytest.raises(io.FormatError):
        io.read_matrix(tmp_path / "bad.mat")


def test_model_round_trip(tmp_path, rng):
    model = L1AEModel.init(4, 12, 3, seed=2)
    model.beta = 0.7
    for bn in model.bn:
        bn.gamma = rng.random(12)
        bn.running_var = rng.random(12) + 0.5
    io.write_model(tmp_path / "m.model", model)
    back = io.read_model(tmp_path / "m.model")
    assert back.A.tobytes() == model.A.tobytes()
    assert back.beta == 0.7 and back.T == 3
    for a, b in zip(model.bn, back.bn):
        for name in ("gamma", "delta", "running_mean", "running_var"):
            assert np.array_equal(getattr(a, name), getattr(b, name))
    assert (tmp_path / "m.model").read_bytes().startswith(b"L1AE-MODEL 1 4 12 3\n")


def test_model_truncated(tmp_path):
    io.write_model(tmp_path / "m.model", L1AEModel.init(2, 5, 2))
    raw = (tmp_path / "m.model").read_bytes()
    (tmp_path / "t.model").write_bytes(raw[:-8])
    with pytest.raises(io.FormatError):
        io.read_model(tmp_path / "t.model")


def test_write_model_type_check(tmp_path):
    with pytest.raises(TypeError):
        io.write_model(tmp_path / "m.model", np.eye(3))


def test_history_csv(tmp_path):
    io.write_history(tmp_path / "h.csv", [HistoryRow(10, 0.5, 0.25), HistoryRow(20, 0.1, 0.2)])
    assert (tmp_path / "h.csv").read_text().splitlines() == [
        "epoch,train_loss,valid_rmse", "10,0.5,0.25", "20,0.1,0.2"]


def test_matrix_digest_sensitive(rng):
    M = rng.standard_normal((3, 4))
    N = M.copy()
    N[1, 2] += 1e-15
    assert io.matrix_digest(M) == io.matrix_digest(M.copy())
    assert io.matrix_digest(M) != io.matrix_digest(N)
