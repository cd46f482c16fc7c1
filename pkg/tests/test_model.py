import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ginlab import model, numkit


def test_jordan_matrix_layout():
    spec = model.JordanSpec((2.0, 0.5j), (((1, 1), (2, 1)), ((1, 2),)))
    j = spec.jordan_matrix()
    assert spec.rank == 5
    assert np.allclose(np.diag(j), [2, 2, 2, 0.5j, 0.5j])
    assert j[1, 2] == 1 and j[0, 1] == 0 and j[2, 3] == 0


@pytest.mark.parametrize(
    "eig,blocks,needle",
    [
        ((1.0, 1.0), (((1, 1),), ((1, 1),)), "distinct"),
        ((1.0,), (((2, 1), (1, 1)),), "not strictly increasing at (0,1)"),
        ((1.0,), (((0, 1),),), "size 0"),
        ((1.0,), (((1, 0),),), "multiplicity 0"),
        ((1.0, 2.0), (((1, 1),),), "block tables"),
    ],
)
def test_spec_violations_are_named(eig, blocks, needle):
    with pytest.raises(model.SpecError, match=needle.replace("(", r"\(").replace(")", r"\)")):
        model.JordanSpec(eig, blocks)


def test_singular_transform_rejected():
    with pytest.raises(model.SpecError, match="singular"):
        model.JordanSpec((1.0,), (((2, 1),),), np.ones((2, 2)))


def test_deformation_is_similar_to_jordan_form():
    p = np.array([[1, 0.3], [0.2j, 1]])
    spec = model.JordanSpec((1.5,), (((2, 1),),), p)
    a0 = model.build_deformation(spec)
    assert np.allclose(np.linalg.inv(p) @ a0 @ p, spec.jordan_matrix())


blocks_strategy = st.lists(st.tuples(st.integers(1, 3), st.integers(1, 2)), min_size=1, max_size=2).map(
    lambda xs: tuple(sorted({p: b for p, b in xs}.items()))
)


@given(
    st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False), min_size=1, max_size=3, unique=True),
    st.data(),
)
def test_spec_dict_round_trip(eigs, data):
    blocks = tuple(data.draw(blocks_strategy) for _ in eigs)
    spec = model.JordanSpec(tuple(eigs), blocks)
    back = model.JordanSpec.from_dict(spec.to_dict())
    assert back.eigenvalues == spec.eigenvalues
    assert back.blocks == spec.blocks


def test_round_trip_with_transform():
    p = np.array([[1, 0.5 - 0.1j], [0, 2j]])
    spec = model.JordanSpec((1.0,), (((2, 1),),), p)
    back = model.JordanSpec.from_dict(spec.to_dict())
    assert np.array_equal(back.transform, spec.transform)


def test_criticality_counts_blocks_at_edge_point():
    spec = model.JordanSpec((1.0, 2.0), (((1, 2), (3, 1)), ((2, 1),)))
    d = model.describe_criticality(spec, 1.0)
    assert d.m == 1 and d.t == 3
    assert d.outlier_exponents == {1: pytest.approx(0.25)}
    with pytest.raises(model.SpecError):
        model.describe_criticality(spec, 0.5)


def test_quaternion_embedding():
    spec = model.JordanSpec((0.5 + 0.5j,), (((2, 1),),))
    e = model.embed_quaternion(spec)
    assert numkit.is_quaternion(e)
    assert np.allclose(np.sort_complex(np.diag(e)), np.sort_complex([0.5 + 0.5j] * 2 + [0.5 - 0.5j] * 2))
    with pytest.raises(model.SpecError):
        model.embed_quaternion(model.JordanSpec((0.5 - 0.5j,), (((1, 1),),)))


def test_config_validation():
    with pytest.raises(model.SpecError):
        model.EnsembleConfig(3, 10)
    with pytest.raises(model.SpecError):
        model.EnsembleConfig(2, 4, sigma=np.diag([1, -1, 1, 1]))
    with pytest.raises(model.SpecError):
        model.EnsembleConfig(1, 3, deformation=model.JordanSpec((1j,), (((1, 1),),)))
    cfg = model.EnsembleConfig(4, 3)
    assert cfg.tau == 0.5 and cfg.matrix_dim == 6


def test_fingerprint_tracks_parameters():
    a = model.EnsembleConfig(2, 8, seed=1)
    b = model.EnsembleConfig(2, 8, seed=1)
    c = model.EnsembleConfig(2, 9, seed=1)
    assert a.fingerprint() == b.fingerprint() != c.fingerprint()
