import json
import os
import subprocess
import sys

import numpy as np
import pytest

from uwbgame import _kernels
from uwbgame.channel import ChannelModel, draw_realization, make_rng
from uwbgame.game import PacketExp, gains_target_sinrs
from uwbgame.params import GameParams
from uwbgame.rake import ARAKE, compute_gains

BACKENDS = _kernels.available_backends()
needs_compiled = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")


def _brpc_args(seed, K=12, L=30, form=0, trace=False, max_sweeps=500):
    params = GameParams(K=K, N_f=10, N_c=30, L=L)
    g = compute_gains(draw_realization(ChannelModel(pathloss_exponent=2), params, make_rng(seed)), ARAKE, params)
    targets = gains_target_sinrs(PacketExp(100), g)
    p0 = np.full(K, 1e-3 * params.noise_var / g.h_sp.max())
    tp = np.empty((max_sweeps + 1, K)) if trace else None
    ts = np.empty((max_sweeps + 1, K)) if trace else None
    return [g.h_sp, g.h_si, np.ascontiguousarray(g.h_mai), targets, params.noise_var, params.p_max,
            p0, max_sweeps, 1e-9, 1e-30, form, tp, ts]


@needs_compiled
@pytest.mark.parametrize("K,L,N_c", [(1, 1, 1), (2, 2, 1), (6, 17, 5), (8, 40, 100), (3, 130, 20)])
def test_correlation_backends_agree(K, L, N_c):
    rng = np.random.default_rng(L)
    alpha = rng.standard_normal((K, L))
    beta = alpha * (rng.random((K, L)) < 0.5)
    beta[:, 0] = alpha[:, 0]
    py = BACKENDS["python"].correlation_gains(alpha, beta, 10 * N_c, N_c)
    cy = BACKENDS["cython"].correlation_gains(alpha, beta, 10 * N_c, N_c)
    for a, b in zip(py, cy):
        np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-15 * max(1.0, np.abs(b).max()))


@needs_compiled
@pytest.mark.parametrize("form", [0, 1])
def test_brpc_backends_agree(form):
    for seed in range(10):
        args_py, args_cy = _brpc_args(seed, form=form, trace=True), _brpc_args(seed, form=form, trace=True)
        n_py, conv_py = BACKENDS["python"].brpc_iterate(*args_py)
        n_cy, conv_cy = BACKENDS["cython"].brpc_iterate(*args_cy)
        assert (n_py, conv_py) == (n_cy, conv_cy)
        np.testing.assert_allclose(args_py[6], args_cy[6], rtol=1e-13)
        np.testing.assert_allclose(args_py[11][: n_py + 1], args_cy[11][: n_cy + 1], rtol=1e-12)
        np.testing.assert_allclose(args_py[12][: n_py + 1], args_cy[12][: n_cy + 1], rtol=1e-12)


def test_dispatch_threshold():
    # big problems always take the FFT route
    K, L = 40, 200
    assert K * K * L * L > _kernels.DIRECT_MAX_WORK
    rng = np.random.default_rng(0)
    alpha = rng.standard_normal((K, L))
    got = _kernels.correlation_gains(alpha, alpha, 1000, 100)
    ref = BACKENDS["python"].correlation_gains(alpha, alpha, 1000, 100)
    for a, b in zip(got, ref):
        np.testing.assert_array_equal(a, b)


def _backend_in_subprocess(choice):
    env = {**os.environ, "UWBGAME_KERNELS": choice}
    return subprocess.run([sys.executable, "-c", "from uwbgame import _kernels; print(_kernels.BACKEND)"],
                          capture_output=True, text=True, env=env)


def test_env_forces_python():
    res = _backend_in_subprocess("python")
    assert res.returncode == 0 and res.stdout.strip() == "python"


def test_env_rejects_unknown_choice():
    res = _backend_in_subprocess("fortran")
    assert res.returncode != 0 and "UWBGAME_KERNELS" in res.stderr


@needs_compiled
def test_env_cython():
    res = _backend_in_subprocess("cython")
    assert res.returncode == 0 and res.stdout.strip() == "cython"


def test_results_do_not_depend_on_backend():
    code = ("import json; from uwbgame import brpc; from uwbgame.channel import ChannelModel, "
            "draw_realization; from uwbgame.game import PacketExp; from uwbgame.params import GameParams; "
            "from uwbgame.rake import ARAKE, compute_gains; p = GameParams(K=6, N_f=10, N_c=10, L=12); "
            "g = compute_gains(draw_realization(ChannelModel(pathloss_exponent=2), p, 3), ARAKE, p); "
            "print(json.dumps(brpc.run(g, p, PacketExp(100))[0].powers.tolist()))")
    outs = []
    for choice in ("python", "auto"):
        res = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                             env={**os.environ, "UWBGAME_KERNELS": choice})
        assert res.returncode == 0, res.stderr
        outs.append(np.array(json.loads(res.stdout)))
    np.testing.assert_allclose(outs[0], outs[1], rtol=1e-12)
