import numpy as np
import pytest

from hvacdpt import nn
from hvacdpt.nn import AdamW, NonFiniteGradient, Tensor, check_gradients, load_ntc, save_ntc

EPS64, TOL64 = 1e-6, 1e-6
EPS32, TOL32 = 1e-3, 1e-3


def t64(rng, *shape, scale=1.0):
    return Tensor(rng.normal(0.0, scale, size=shape).astype(np.float64), requires_grad=True)


def t32(rng, *shape, scale=1.0):
    return Tensor(rng.normal(0.0, scale, size=shape).astype(np.float32), requires_grad=True)


# ---------------------------------------------------------------- primitives


def test_softmax_rows_sum_to_one():
    rng = np.random.default_rng(0)
    x = Tensor(rng.normal(size=(4, 7, 9)))
    y = nn.softmax(x)
    assert np.allclose(y.data.sum(axis=-1), 1.0, atol=1e-6)


def test_causal_attention_ignores_future_positions():
    rng = np.random.default_rng(1)
    T, C, H = 6, 8, 2
    mask = nn.causal_mask(T)
    params = {n: t32(rng, C, C, scale=0.3) for n in ("wq", "wk", "wv", "wo")}
    biases = {n: Tensor(np.zeros(C, dtype=np.float32)) for n in ("bq", "bk", "bv", "bo")}
    x = rng.normal(size=(1, T, C)).astype(np.float32)

    def forward(inp):
        return nn.causal_self_attention(
            Tensor(inp), params["wq"], biases["bq"], params["wk"], biases["bk"],
            params["wv"], biases["bv"], params["wo"], biases["bo"], H, mask,
        ).data

    base = forward(x)
    for j in range(T - 1):
        perturbed = x.copy()
        perturbed[0, j + 1 :, :] += rng.normal(size=(T - j - 1, C)).astype(np.float32)
        out = forward(perturbed)
        assert np.array_equal(out[0, : j + 1], base[0, : j + 1])


def test_dropout_p0_is_identity():
    rng = np.random.default_rng(2)
    x = t32(rng, 5, 5)
    y = nn.dropout(x, p=0.0)
    assert np.array_equal(y.data, x.data)
    y.sum().backward()
    assert np.array_equal(x.grad, np.ones_like(x.data))


def test_dropout_active_scales_and_masks():
    rng = np.random.default_rng(3)
    x = Tensor(np.ones((100, 100), dtype=np.float32), requires_grad=True)
    y = nn.dropout(x, p=0.5, rng=np.random.default_rng(0))
    kept = y.data != 0
    assert 0.4 < kept.mean() < 0.6
    assert np.allclose(y.data[kept], 2.0)


def test_shape_mismatch_reports_both_shapes():
    a = Tensor(np.zeros((2, 3)))
    b = Tensor(np.zeros((4, 5)))
    with pytest.raises(nn.ShapeError, match=r"\(2, 3\).*\(4, 5\)"):
        nn.matmul(a, b)


GRADCHECK_CASES = {}


def gradcase(name):
    def deco(fn):
        GRADCHECK_CASES[name] = fn
        return fn

    return deco


@gradcase("add")
def _case_add(rng, mk):
    a, b = mk(rng, 3, 4), mk(rng, 4)  # broadcast bias add
    return lambda: nn.tsum(nn.mul(nn.add(a, b), nn.add(a, 1.0))), {"a": a, "b": b}


@gradcase("sub_div")
def _case_sub_div(rng, mk):
    a, b = mk(rng, 3, 4), mk(rng, 3, 4)
    return lambda: nn.tsum(nn.div(nn.sub(a, b), nn.add(nn.square(b), 2.0))), {"a": a, "b": b}


@gradcase("matmul")
def _case_matmul(rng, mk):
    a, b = mk(rng, 3, 4), mk(rng, 4, 5)
    return lambda: nn.tmean(nn.square(nn.matmul(a, b))), {"a": a, "b": b}


@gradcase("matmul_batched")
def _case_matmul_batched(rng, mk):
    a, b = mk(rng, 2, 3, 4, 5), mk(rng, 2, 3, 5, 4)
    return lambda: nn.tmean(nn.matmul(a, b)), {"a": a, "b": b}


@gradcase("tanh")
def _case_tanh(rng, mk):
    a = mk(rng, 5, 3)
    return lambda: nn.tsum(nn.square(nn.tanh(a))), {"a": a}


@gradcase("gelu")
def _case_gelu(rng, mk):
    a = mk(rng, 5, 3)
    return lambda: nn.tsum(nn.gelu(a)), {"a": a}


@gradcase("sigmoid_exp_log")
def _case_sigmoid(rng, mk):
    a = mk(rng, 4, 4)
    return lambda: nn.tsum(nn.log(nn.add(nn.exp(nn.sigmoid(a)), 1.0))), {"a": a}


@gradcase("softmax")
def _case_softmax(rng, mk):
    a = mk(rng, 3, 6)
    w = mk(rng, 3, 6)
    return lambda: nn.tsum(nn.mul(nn.softmax(a), w)), {"a": a, "w": w}


@gradcase("layer_norm")
def _case_layer_norm(rng, mk):
    a, g, b = mk(rng, 4, 8), mk(rng, 8), mk(rng, 8)
    return lambda: nn.tmean(nn.square(nn.layer_norm(a, g, b))), {"a": a, "g": g, "b": b}


@gradcase("embedding_lookup")
def _case_embedding(rng, mk):
    table = mk(rng, 7, 4)
    idx = np.array([0, 3, 3, 6, 1])
    return lambda: nn.tmean(nn.square(nn.embedding_lookup(table, idx))), {"table": table}


@gradcase("mse_loss")
def _case_mse(rng, mk):
    a, b = mk(rng, 6, 2), mk(rng, 6, 2)
    return lambda: nn.mse_loss(a, b), {"a": a, "b": b}


@gradcase("minimum_clip")
def _case_minimum(rng, mk):
    a, b = mk(rng, 8), mk(rng, 8)
    return lambda: nn.tsum(nn.minimum(nn.clip(a, -0.7, 0.7), b)), {"a": a, "b": b}


@gradcase("mean_reshape_transpose")
def _case_mean(rng, mk):
    a = mk(rng, 4, 6)
    return (
        lambda: nn.tmean(nn.square(nn.transpose(nn.reshape(a, (2, 12)), (1, 0)))),
        {"a": a},
    )


@gradcase("attention")
def _case_attention(rng, mk):
    T, C = 5, 8
    mask = nn.causal_mask(T, dtype=np.float64)
    ps = {n: mk(rng, C, C, scale=0.4) for n in ("wq", "wk", "wv", "wo")}
    bs = {n: mk(rng, C, scale=0.1) for n in ("bq", "bk", "bv", "bo")}
    x = mk(rng, 2, T, C)

    def loss():
        y = nn.causal_self_attention(
            x, ps["wq"], bs["bq"], ps["wk"], bs["bk"], ps["wv"], bs["bv"],
            ps["wo"], bs["bo"], 2, mask,
        )
        return nn.tmean(nn.square(y))

    return loss, {"x": x, **ps, **bs}


@pytest.mark.parametrize("name", sorted(GRADCHECK_CASES))
def test_gradcheck_float64(name):
    rng = np.random.default_rng(hash(name) % 2**32)
    loss, tensors = GRADCHECK_CASES[name](rng, t64)
    check_gradients(loss, tensors, eps=EPS64, tol=TOL64)


@pytest.mark.parametrize("name", sorted(GRADCHECK_CASES))
def test_gradcheck_float32(name):
    rng = np.random.default_rng(hash(name) % 2**31)
    loss, tensors = GRADCHECK_CASES[name](rng, t32)
    check_gradients(loss, tensors, eps=EPS32, tol=TOL32)


# ---------------------------------------------------------------- AdamW


def test_adamw_zero_grad_no_decay_keeps_params():
    p = Tensor(np.array([1.0, -2.0, 3.0], dtype=np.float32), requires_grad=True)
    opt = AdamW({"p": p}, lr=1e-3, weight_decay=0.0)
    p.grad = np.zeros_like(p.data)
    before = p.data.copy()
    opt.step()
    assert np.array_equal(p.data, before)


def test_adamw_decoupled_decay_formula():
    p = Tensor(np.array([2.0, -4.0], dtype=np.float64), requires_grad=True)
    opt = AdamW({"p": p}, lr=1e-3, weight_decay=1e-4)
    start = p.data.copy()
    steps = 5
    for _ in range(steps):
        p.grad = np.zeros_like(p.data)
        opt.step()
    assert np.allclose(p.data, start * (1.0 - 1e-3 * 1e-4) ** steps, rtol=1e-12)


def test_adamw_solves_quadratic():
    p = Tensor(np.array([0.0]), requires_grad=True)
    opt = AdamW({"p": p}, lr=0.05, weight_decay=0.0)
    for _ in range(2000):
        opt.zero_grad()
        loss = nn.tsum(nn.square(nn.sub(p, 3.0)))
        loss.backward()
        opt.step()
        if abs(float(p.data[0]) - 3.0) < 0.01:
            break
    assert abs(float(p.data[0]) - 3.0) < 0.01


def test_adamw_rejects_nonfinite_gradient():
    p = Tensor(np.array([1.0]), requires_grad=True)
    opt = AdamW({"badparam": p}, lr=0.01)
    p.grad = np.array([np.nan])
    with pytest.raises(NonFiniteGradient, match="badparam"):
        opt.step()


def test_adamw_deterministic():
    def run():
        rng = np.random.default_rng(9)
        p = Tensor(rng.normal(size=(4, 4)).astype(np.float32), requires_grad=True)
        opt = AdamW({"p": p}, lr=0.01, weight_decay=1e-4)
        for _ in range(50):
            opt.zero_grad()
            nn.tsum(nn.square(nn.tanh(p))).backward()
            opt.step()
        return p.data.copy()

    assert np.array_equal(run(), run())


# ---------------------------------------------------------------- checkpoints


def test_ntc_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(4)
    tensors = {
        "layer.w": rng.normal(size=(8, 3)).astype(np.float32),
        "layer.b": rng.normal(size=(3,)).astype(np.float32),
        "scalarish": rng.normal(size=(1,)).astype(np.float32),
    }
    path = tmp_path / "m.ntc"
    save_ntc(path, tensors)
    loaded = load_ntc(path)
    assert set(loaded) == set(tensors)
    for k in tensors:
        assert np.array_equal(loaded[k], tensors[k])
        assert loaded[k].dtype == np.float32
    save_ntc(tmp_path / "m2.ntc", loaded)
    assert (tmp_path / "m.ntc").read_bytes() == (tmp_path / "m2.ntc").read_bytes()


def test_ntc_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk.ntc"
    path.write_bytes(b"XXXX\x00\x00\x00\x00")
    with pytest.raises(nn.CheckpointError, match="magic"):
        load_ntc(path)
