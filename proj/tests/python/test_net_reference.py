"""The network against an independent torch autograd implementation."""

import numpy as np
import pytest

import delcode

torch = pytest.importorskip("torch")


def gru_scan(p, prefix, x, reverse, bias):
    # x: (T, B, in)
    Wz, Wr, Wh = (torch.tensor(p[f"{prefix}.{k}"], requires_grad=True) for k in ("Wz", "Wr", "Wh"))
    leaves = {f"{prefix}.Wz": Wz, f"{prefix}.Wr": Wr, f"{prefix}.Wh": Wh}
    d = Wz.shape[0]
    if bias:
        bz, br, bh = (torch.tensor(p[f"{prefix}.{k}"][:, 0], requires_grad=True) for k in ("bz", "br", "bh"))
        leaves.update({f"{prefix}.bz": bz, f"{prefix}.br": br, f"{prefix}.bh": bh})
    else:
        bz = br = bh = torch.zeros(d, dtype=torch.float64)
    T, B, _ = x.shape
    h = torch.zeros(B, d, dtype=torch.float64)
    out = [None] * T
    for t in reversed(range(T)) if reverse else range(T):
        hu = torch.cat([h, x[t]], dim=1)
        z = torch.sigmoid(hu @ Wz.T + bz)
        r = torch.sigmoid(hu @ Wr.T + br)
        c = torch.tanh(torch.cat([r * h, x[t]], dim=1) @ Wh.T + bh)
        h = (1 - z) * h + z * c
        out[t] = h
    return torch.stack(out), leaves


def reference(net, p, x, y, layers, mlp, bias, loss="bce"):
    leaves = {}
    cur = torch.tensor(x)
    for l in range(layers):
        f, lf = gru_scan(p, f"gru{l}.fwd", cur, False, bias)
        b, lb = gru_scan(p, f"gru{l}.bwd", cur, True, bias)
        leaves.update(lf)
        leaves.update(lb)
        cur = torch.cat([f, b], dim=2)
        if l + 1 < layers:
            g = torch.tensor(p[f"bn{l}.gamma"][:, 0], requires_grad=True)
            be = torch.tensor(p[f"bn{l}.beta"][:, 0], requires_grad=True)
            leaves[f"bn{l}.gamma"], leaves[f"bn{l}.beta"] = g, be
            flat = cur.reshape(-1, cur.shape[2])
            mean = flat.mean(0)
            var = ((flat - mean) ** 2).mean(0)
            cur = ((cur - mean) / torch.sqrt(var + 1e-5)) * g + be
    a = cur
    for i in range(len(mlp)):
        W = torch.tensor(p[f"mlp.{i}.W"], requires_grad=True)
        bb = torch.tensor(p[f"mlp.{i}.b"][:, 0], requires_grad=True)
        leaves[f"mlp.{i}.W"], leaves[f"mlp.{i}.b"] = W, bb
        a = a @ W.T + bb
        if i + 1 < len(mlp):
            a = torch.relu(a)
    logits = a[..., 0]
    prob = torch.sigmoid(logits)
    yt = torch.tensor(y)
    if loss == "bce":
        value = -(yt * torch.log(prob) + (1 - yt) * torch.log(1 - prob)).mean()
    else:
        value = ((prob - yt) ** 2).mean()
    value.backward()
    grads = {}
    for k, v in leaves.items():
        g = v.grad.numpy()
        grads[k] = g[:, None] if g.ndim == 1 else g
    return logits.detach().numpy(), value.item(), grads


@pytest.mark.parametrize("layers,hidden,mlp,bias,loss", [(1, 5, [1], False, "bce"), (2, 6, [4, 1], True, "bce"),
                                                           (3, 4, [5, 3, 1], False, "mse")])
def test_forward_and_gradients_match_torch(layers, hidden, mlp, bias, loss):
    rng = np.random.default_rng(layers)
    net = delcode.Net(in_dim=3, layers=layers, hidden=hidden, mlp=mlp, bias=bias, seed=7)
    p = net.parameters()
    # non-trivial batch-norm affine parameters
    for l in range(layers - 1):
        for name in ("gamma", "beta"):
            v = rng.uniform(0.5, 1.5, (2 * hidden, 1)) if name == "gamma" else rng.uniform(-0.5, 0.5, (2 * hidden, 1))
            net.set(f"bn{l}.{name}", v)
    p = net.parameters()
    T, B = 5, 3
    x = rng.uniform(-1, 1, (T, B, 3))
    y = rng.integers(0, 2, (T, B)).astype(np.float64)
    logits_ref, value_ref, grads_ref = reference(net, p, x, y, layers, mlp, bias, loss)
    assert np.allclose(net.forward(x, train=True), logits_ref, atol=1e-12, rtol=0)
    value, grads = net.loss_and_grad(x, y, loss)
    assert value == pytest.approx(value_ref, abs=1e-12)
    assert set(grads) == set(grads_ref)
    for k in grads:
        assert np.allclose(grads[k], grads_ref[k], atol=1e-11, rtol=1e-8), k


def test_eval_mode_uses_running_statistics():
    net = delcode.Net(in_dim=2, layers=2, hidden=3, mlp=[1], seed=2)
    x = np.random.default_rng(0).uniform(-1, 1, (4, 2, 2))
    before = net.forward(x, train=False)
    net.forward(x, train=True)
    assert not np.allclose(net.buffers()["bn0.running_mean"], 0.0)
    after = net.forward(x, train=False)
    assert not np.allclose(before, after)
    single = net.forward(x[:, :1], train=False)
    assert np.allclose(single, after[:, :1], atol=1e-12)
