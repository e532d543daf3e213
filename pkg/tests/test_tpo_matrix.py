import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eqtp.irreps import IrrepVector, single_copies
from eqtp.kernels import OpCounter
from eqtp.tpo_cg import cgtp_path, valid_paths
from eqtp.tpo_matrix import (
    TensorRepMatrix, default_l_tilde, embedding_matrix, mtp, mtp_embed, mtp_extract, mtp_path_weights,
)
from eqtp.wigner import Rotation, cg_real_dense, wigner_d_all

import oracles


def rand(L, rng, batch=()):
    return IrrepVector.random(single_copies(L), rng, batch)


def test_default_l_tilde():
    assert default_l_tilde(1, 1, 2) == 1
    assert default_l_tilde(4, 4, 8) == 4
    assert default_l_tilde(3, 2, 5) == 3


@pytest.mark.parametrize("lt", [1, 2, 3])
def test_scalar_embeds_to_identity(lt):
    x = IrrepVector(single_copies(0), [2.0])
    z = mtp_embed(x, lt).values
    # sign of the l=0 coupling column is (-1)^lt in this phase convention
    np.testing.assert_allclose(z, (-1) ** lt * 2.0 * np.eye(2 * lt + 1) / math.sqrt(2 * lt + 1), atol=1e-15)


@pytest.mark.parametrize("impl", ["naive", "sparse"])
def test_embed_then_extract(impl, rng):
    for lt in (1, 2, 3):
        x = rand(2 * lt, rng, (5,))
        z = mtp_embed(x, lt, impl)
        np.testing.assert_allclose(mtp_extract(z, 2 * lt, impl).data, x.data, atol=1e-13)


def test_embedding_columns_orthonormal():
    m = embedding_matrix(6, 3)
    np.testing.assert_allclose(m.T @ m, np.eye(49), atol=1e-13)


def test_zero_embeds_to_zero():
    assert not mtp_embed(IrrepVector.zeros(single_copies(2)), 1).values.any()


def test_scalars_only_product():
    a, b = 1.7, -0.4
    out = mtp(IrrepVector(single_copies(0), [a]), IrrepVector(single_copies(0), [b]), l_tilde=2)
    # (aI/sqrt5)(bI/sqrt5) projected on the l=0 column I/sqrt5 (sign (-1)^2 = 1)
    assert out.data[0] == pytest.approx(a * b / math.sqrt(5))


@pytest.mark.parametrize("L", [0, 1, 2, 3, 4])
def test_naive_matches_sparse(L, rng):
    x, y = rand(L, rng, (20,)), rand(L, rng, (20,))
    np.testing.assert_allclose(mtp(x, y, impl="naive").data, mtp(x, y, impl="sparse").data, atol=1e-12)


def test_not_symmetric_and_cross_product(rng):
    p = oracles.XYZ_PERM
    u, v = rng.standard_normal((2, 10, 3))
    pad = np.zeros((10, 1))
    x = IrrepVector(single_copies(1), np.hstack([pad, u @ p.T]))
    y = IrrepVector(single_copies(1), np.hstack([pad, v @ p.T]))
    anti = (mtp(x, y, 1).data - mtp(y, x, 1).data)[:, 1:4] @ p
    ratio = anti / np.cross(u, v)
    assert abs(ratio[0, 0]) > 1e-3
    np.testing.assert_allclose(ratio, ratio[0, 0], rtol=1e-10)
    # the antisymmetric part is twice the [1,1,1] path term, since that CG table is antisymmetric
    w = mtp_path_weights(1, 1, 1, 1)
    ref = 2 * w * cgtp_path(x.data[:, 1:4], y.data[:, 1:4], (1, 1, 1)) @ p
    np.testing.assert_allclose(anti, ref, atol=1e-13)


def test_path_weights():
    assert mtp_path_weights(1, 1, 3, 1) == 0.0
    assert mtp_path_weights(0, 0, 3, 2) == 0.0
    assert mtp_path_weights(1, 1, 1, 1) == pytest.approx(-0.5)
    # embed gives s*I/k with s = (-1)^lt, k = sqrt(2lt+1); extraction contributes another s*I/k
    assert mtp_path_weights(0, 0, 0, 1) == pytest.approx(-1 / math.sqrt(3))
    assert mtp_path_weights(0, 0, 0, 2) == pytest.approx(1 / math.sqrt(5))


@pytest.mark.parametrize("L", [1, 2, 3])
def test_path_expansion(L, rng):
    x, y = rand(L, rng, (10,)), rand(L, rng, (10,))
    lt = default_l_tilde(L, L, 2 * L)
    ref = np.zeros((10, (2 * L + 1) ** 2))
    for p in valid_paths(L, L, 2 * L):
        w = mtp_path_weights(*p, lt)
        ref[:, p.l3 ** 2: (p.l3 + 1) ** 2] += w * cgtp_path(
            x.data[:, p.l1 ** 2: (p.l1 + 1) ** 2], y.data[:, p.l2 ** 2: (p.l2 + 1) ** 2], p)
    np.testing.assert_allclose(mtp(x, y).data, ref, atol=1e-10)


def test_path_tensor_from_brute_matrix_product(rng):
    # the restricted map built by explicit matrix products of CG slices
    lt, l1, l2, l3 = 2, 2, 3, 3
    c1, c2, c3 = cg_real_dense(lt, lt, l1), cg_real_dense(lt, lt, l2), cg_real_dense(lt, lt, l3)
    x, y = rng.standard_normal(2 * l1 + 1), rng.standard_normal(2 * l2 + 1)
    z = (c1 @ x) @ (c2 @ y)
    out = np.einsum("ack,ac->k", c3, z)
    w = mtp_path_weights(l1, l2, l3, lt)
    np.testing.assert_allclose(out, w * cgtp_path(x, y, (l1, l2, l3)), atol=1e-13)


def test_triangle_selection_rule():
    L = 2
    for l1 in range(L + 1):
        for l2 in range(L + 1):
            for i in range(2 * l1 + 1):
                for j in range(2 * l2 + 1):
                    a, b = np.zeros(9), np.zeros(9)
                    a[l1 * l1 + i] = b[l2 * l2 + j] = 1.0
                    out = mtp(IrrepVector(single_copies(L), a), IrrepVector(single_copies(L), b), 2 * L).data
                    for l3 in range(2 * L + 1):
                        if not abs(l1 - l2) <= l3 <= l1 + l2:
                            assert np.max(np.abs(out[l3 * l3: (l3 + 1) ** 2])) <= 1e-13


@pytest.mark.parametrize("impl", ["naive", "sparse"])
def test_equivariance(impl, rng):
    L = 4
    x, y = rand(L, rng, (10,)), rand(L, rng, (10,))
    out = mtp(x, y, impl=impl)
    assert out.irreps == single_copies(2 * L)
    for _ in range(10):
        d = wigner_d_all(2 * L, Rotation.random(rng))
        assert np.max(np.abs(mtp(x.rotate(d), y.rotate(d), impl=impl).data - out.rotate(d).data)) <= 1e-10


@given(st.integers(0, 3), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=20, deadline=None)
def test_bilinear(L, seed):
    rng = np.random.default_rng(seed)
    x, y1, y2 = rand(L, rng), rand(L, rng), rand(L, rng)
    lhs = mtp(x, 3.0 * y1 + y2).data
    np.testing.assert_allclose(lhs, 3.0 * mtp(x, y1).data + mtp(x, y2).data, atol=1e-12)


def test_op_counts_naive_exceed_sparse(rng):
    x, y = rand(4, rng), rand(4, rng)
    naive, sparse = OpCounter(), OpCounter()
    mtp(x, y, impl="naive", counter=naive)
    mtp(x, y, impl="sparse", counter=sparse)
    n = 9
    assert naive.stages["mtp.matmul"] == sparse.stages["mtp.matmul"] == n ** 3
    assert naive.stages["mtp.embed"] == 2 * n * n * 25
    assert sparse.total < naive.total


def test_errors(rng):
    with pytest.raises(ValueError):
        mtp_embed(rand(3, rng), 1)
    with pytest.raises(ValueError):
        mtp(rand(2, rng), rand(2, rng), 4, l_tilde=1)
    with pytest.raises(ValueError):
        TensorRepMatrix(1, np.zeros((2, 2)))
    with pytest.raises(ValueError):
        mtp_extract(TensorRepMatrix(1, np.zeros((3, 3))), 3)
