import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgauss import serialize, states
from qgauss.errors import DomainError, ShapeError


@pytest.mark.parametrize(
    "text,kind,params",
    [
        ("vacuum", "vacuum", {}),
        ("gibbs:beta=2", "gibbs", {"beta": 2.0}),
        ("coherent:u=0.5,-0.25", "coherent", {"u": 0.5 - 0.25j}),
        ("squeezed:r=0.5,theta=0.1,u=1,2", "squeezed", {"r": 0.5, "theta": 0.1, "u": 1 + 2j}),
        ("squeezed:r=0.5", "squeezed", {"r": 0.5, "theta": 0.0, "u": 0j}),
        ("fock:n=3", "fock", {"n": 3}),
        ("file:/tmp/x.json", "file", {"path": "/tmp/x.json"}),
    ],
)
def test_parse_state(text, kind, params):
    spec = states.parse_state(text)
    assert spec.kind == kind and spec.params == params


@pytest.mark.parametrize(
    "text",
    ["", "vaccum", "gibbs", "gibbs:beta=-1", "gibbs:beta=x", "coherent:u=1,2,3", "fock:n=-1",
     "fock:n=1.5", "squeezed:theta=1", "coherent:v=1", "vacuum:x=1", "file:"],
)
def test_parse_state_rejects(text):
    with pytest.raises(ValueError):
        states.parse_state(text)


def test_parse_kv_and_complex():
    assert states.parse_kv("r=0.5,u=1,2,theta=3") == {"r": "0.5", "u": "1,2", "theta": "3"}
    assert states.parse_complex("1.5") == 1.5
    assert states.parse_complex(" -1e-3 , 2 ") == complex(-1e-3, 2)
    with pytest.raises(ValueError):
        states.parse_kv("=3")


@given(st.complex_numbers(allow_nan=False, allow_infinity=False))
def test_complex_text_round_trip(z):
    assert states.parse_complex(states.format_complex(z)) == z


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_gibbs_dm_is_renormalized_geometric(beta):
    rho = states.gibbs_dm(beta, 30)
    p = np.diag(rho).real
    assert p.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(p[1:] / p[:-1], math.exp(-beta))
    states.as_density_matrix(rho)


@pytest.mark.parametrize(
    "spec",
    ["vacuum", "gibbs:beta=1", "coherent:u=0.3,0.4", "squeezed:r=0.4,theta=1,u=0.1,0", "fock:n=2"],
)
def test_density_matrices_are_valid(spec):
    rho = states.parse_state(spec).density_matrix(40)
    states.as_density_matrix(rho)


def test_gaussian_kinds():
    assert states.parse_state("fock:n=1").gaussian() is None
    assert states.parse_state("coherent:u=0.5,0").gaussian().w == pytest.approx(-1j)


def test_as_density_matrix_rejects():
    with pytest.raises(ShapeError):
        states.as_density_matrix(np.ones((2, 3)))
    with pytest.raises(ShapeError):
        states.as_density_matrix(np.array([[0.5, 0.1j], [0.1j, 0.5]]))
    with pytest.raises(DomainError):
        states.as_density_matrix(np.diag([0.6, 0.6]))
    with pytest.raises(DomainError):
        states.as_density_matrix(np.diag([1.2, -0.2]))
    with pytest.raises(DomainError):
        states.fock_dm(5, 5)


def test_file_state_round_trip(tmp_path):
    rho = states.coherent_dm(0.3 + 0.1j, 12)
    path = tmp_path / "rho.json"
    serialize.write_text(str(path), serialize.dumps(serialize.operator_to_json(rho)))
    spec = states.parse_state(f"file:{path}")
    assert np.array_equal(spec.density_matrix(12), rho)
    with pytest.raises(ShapeError):
        spec.density_matrix(13)


def test_operator_json_is_bit_faithful(rng):
    op = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    text = serialize.dumps(serialize.operator_to_json(op))
    assert np.array_equal(serialize.operator_from_json(json.loads(text)), op)
    vec = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert np.array_equal(serialize.vector_from_json(serialize.vector_to_json(vec)), vec)
    with pytest.raises(ShapeError):
        serialize.operator_from_json({"dim": 3, "re": [[0.0]], "im": [[0.0]]})


def test_charfn_csv_round_trip(rng):
    z = rng.normal(size=7) + 1j * rng.normal(size=7)
    F = rng.normal(size=7) + 1j * rng.normal(size=7)
    text = serialize.charfn_csv(z, F)
    assert text.splitlines()[0] == "z_re,z_im,F_re,F_im"
    z2, F2 = serialize.read_charfn_csv(text)
    assert np.array_equal(z, z2) and np.array_equal(F, F2)


def test_write_text_is_atomic_and_leaves_no_temp(tmp_path):
    target = tmp_path / "out.txt"
    serialize.write_text(str(target), "one\n")
    serialize.write_text(str(target), "two\n")
    assert target.read_text() == "two\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]
