import json
import pathlib

import numpy as np
import pytest

from phdelay import (
    DelayPHSystem,
    GeneralDelaySystem,
    HistoryFunction,
    OutputMismatchError,
    StandardLTISystem,
    StandardPHSystem,
    SystemFormatError,
    SystemValidationError,
    delay_ph_to_general,
    general_to_delay_ph,
    read_system,
    save_system,
    validate,
    write_system,
)
from helpers import rand_certified_delay_ph

DATA = pathlib.Path(__file__).parent / "data"


def scalar_example(theta=None):
    """The running scalar system: H=1, J=0, R=2, Z=1, G=1, tau=1."""
    return DelayPHSystem(
        H=[[1.0]], J=[[0.0]], R=[[2.0]], Z=[[1.0]], G=[[1.0]], tau=1.0,
        theta=theta,
    )


# ---------------------------------------------------------------------------
# construction


def test_scalars_promote_to_1x1():
    sys1 = DelayPHSystem(H=1.0, J=0.0, R=2.0, Z=1.0, G=1.0, tau=1.0)
    assert sys1.H.shape == (1, 1)
    assert sys1.n == 1 and sys1.m == 1
    assert sys1.tau == 1.0 and isinstance(sys1.tau, float)


def test_matrices_are_read_only():
    sys1 = scalar_example()
    with pytest.raises(ValueError):
        sys1.H[0, 0] = 5.0
    lti = StandardLTISystem(A=np.eye(2), B=np.ones((2, 1)), C=np.ones((1, 2)))
    with pytest.raises(ValueError):
        lti.A[0, 0] = 3.0


def test_non_finite_entries_rejected_at_construction():
    with pytest.raises(ValueError, match="non-finite"):
        DelayPHSystem(H=[[np.nan]], J=0.0, R=1.0, Z=0.0, G=1.0, tau=1.0)


# ---------------------------------------------------------------------------
# validate


def test_validate_passes_on_certified_instances():
    rng = np.random.default_rng(0)
    for n in (1, 2, 4):
        assert validate(rand_certified_delay_ph(rng, n)) == []


def test_validate_flags_indefinite_h():
    sys1 = DelayPHSystem(H=np.diag([1.0, -1.0]), J=np.zeros((2, 2)),
                         R=np.eye(2), Z=np.zeros((2, 2)), G=np.ones((2, 1)),
                         tau=1.0)
    msgs = validate(sys1)
    assert any("H is not positive definite" in m for m in msgs)


def test_validate_flags_non_antisymmetric_j():
    sys1 = DelayPHSystem(H=np.eye(2), J=np.array([[0.0, 1.0], [1.0, 0.0]]),
                         R=np.eye(2), Z=np.zeros((2, 2)), G=np.ones((2, 1)),
                         tau=1.0)
    msgs = validate(sys1)
    assert any("J is not antisymmetric" in m for m in msgs)


def test_validate_allows_indefinite_r_for_delay_kind():
    # the delay form only requires R symmetric; definiteness is what the
    # certificate decides
    sys1 = DelayPHSystem(H=np.eye(2), J=np.zeros((2, 2)),
                         R=np.diag([1.0, -1.0]), Z=np.zeros((2, 2)),
                         G=np.ones((2, 1)), tau=1.0)
    assert validate(sys1) == []


def test_validate_flags_asymmetric_r():
    sys1 = DelayPHSystem(H=np.eye(2), J=np.zeros((2, 2)),
                         R=np.array([[1.0, 0.3], [0.0, 1.0]]),
                         Z=np.zeros((2, 2)), G=np.ones((2, 1)), tau=1.0)
    assert any("R is not symmetric" in m for m in validate(sys1))


def test_validate_flags_standard_ph_indefinite_r():
    sys1 = StandardPHSystem(H=np.eye(2), J=np.zeros((2, 2)),
                            R=np.diag([1.0, -0.1]), G=np.ones((2, 1)))
    assert any("R is not positive semidefinite" in m for m in validate(sys1))


def test_validate_flags_bad_theta_and_tau():
    sys1 = DelayPHSystem(H=[[1.0]], J=[[0.0]], R=[[1.0]], Z=[[0.0]],
                         G=[[1.0]], tau=0.0, theta=[[-1.0]])
    msgs = validate(sys1)
    assert any("theta is not positive semidefinite" in m for m in msgs)
    assert any("tau must be positive" in m for m in msgs)


def test_validate_flags_shape_mismatch():
    sys1 = DelayPHSystem(H=np.zeros((2, 3)), J=np.zeros((2, 2)),
                         R=np.eye(2), Z=np.zeros((2, 2)), G=np.ones((2, 1)),
                         tau=1.0)
    assert any("H has shape" in m for m in validate(sys1))


# ---------------------------------------------------------------------------
# history functions


def test_history_constant():
    hist = HistoryFunction.constant([1.0, -2.0], tau=0.5)
    assert hist.n == 2
    assert hist.span == 0.5
    np.testing.assert_array_equal(hist.sample_at([-0.5, -0.25, 0.0]),
                                  [[1.0, 1.0, 1.0], [-2.0, -2.0, -2.0]])


def test_history_linear_interpolation():
    hist = HistoryFunction(grid=[-1.0, 0.0], values=[[0.0, 1.0]])
    np.testing.assert_allclose(hist.sample_at([-0.75, -0.5, -0.25]),
                               [[0.25, 0.5, 0.75]])


def test_history_grid_validation():
    with pytest.raises(ValueError, match="end at 0"):
        HistoryFunction(grid=[-1.0, -0.5], values=[[1.0, 1.0]])
    with pytest.raises(ValueError, match="strictly increasing"):
        HistoryFunction(grid=[0.0, -1.0], values=[[1.0, 1.0]])
    with pytest.raises(ValueError, match="at least two"):
        HistoryFunction(grid=[0.0], values=[[1.0]])
    with pytest.raises(ValueError, match="columns"):
        HistoryFunction(grid=[-1.0, 0.0], values=[[1.0, 2.0, 3.0]])


# ---------------------------------------------------------------------------
# conversions


def test_delay_ph_to_general_solves_h():
    rng = np.random.default_rng(1)
    for _ in range(10):
        sys1 = rand_certified_delay_ph(rng, 3)
        gen = delay_ph_to_general(sys1)
        np.testing.assert_allclose(sys1.H @ gen.A0, sys1.J - sys1.R, atol=1e-12)
        np.testing.assert_allclose(sys1.H @ gen.A1, -sys1.Z, atol=1e-12)
        np.testing.assert_allclose(sys1.H @ gen.B, sys1.G, atol=1e-12)
        np.testing.assert_array_equal(gen.C, sys1.G.T)
        assert gen.tau == sys1.tau


def test_general_round_trip_recovers_structure():
    rng = np.random.default_rng(2)
    for _ in range(10):
        sys1 = rand_certified_delay_ph(rng, 4, m=2)
        back = general_to_delay_ph(delay_ph_to_general(sys1), sys1.H)
        np.testing.assert_allclose(back.J, sys1.J, atol=1e-10)
        np.testing.assert_allclose(back.R, sys1.R, atol=1e-10)
        np.testing.assert_allclose(back.Z, sys1.Z, atol=1e-10)
        np.testing.assert_allclose(back.G, sys1.G, atol=1e-10)


def test_general_to_delay_ph_rejects_output_mismatch():
    gen = GeneralDelaySystem(A0=[[-1.0]], A1=[[0.0]], B=[[1.0]], C=[[2.0]],
                             tau=1.0)
    with pytest.raises(OutputMismatchError) as err:
        general_to_delay_ph(gen, H=[[1.0]])  # C = 2 but B^T H = 1
    assert err.value.residual == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# JSON round trips


def test_write_read_round_trip_is_canonical():
    sys1 = scalar_example(theta=[[1.0]])
    text = write_system(sys1)
    again = read_system(text)
    assert write_system(again) == text
    np.testing.assert_array_equal(again.theta, sys1.theta)
    # canonical form sorts keys
    doc = json.loads(text)
    assert list(doc) == sorted(doc)


def test_write_preserves_17_digit_reals():
    value = 1.0 / 3.0
    sys1 = DelayPHSystem(H=[[1.0]], J=[[0.0]], R=[[value]], Z=[[0.0]],
                         G=[[1.0]], tau=1.0)
    again = read_system(write_system(sys1))
    assert float(again.R[0, 0]) == value


def test_save_and_read_file(tmp_path):
    path = tmp_path / "sys.json"
    sys1 = scalar_example()
    save_system(sys1, path)
    again = read_system(path)
    assert isinstance(again, DelayPHSystem)
    np.testing.assert_array_equal(again.R, sys1.R)


def test_fixture_document_matches_constants():
    sys1 = read_system(DATA / "mass_spring_damper.json")
    assert isinstance(sys1, StandardPHSystem)
    np.testing.assert_array_equal(sys1.H, np.eye(2))
    np.testing.assert_array_equal(sys1.J, [[0.0, 1.0], [-1.0, 0.0]])
    np.testing.assert_array_equal(sys1.R, np.diag([0.0, 0.5]))
    np.testing.assert_array_equal(sys1.G, [[0.0], [1.0]])


def test_read_rejects_schema_problems():
    base = {"kind": "delay_ph", "n": 1, "m": 1, "tau": 1.0, "H": [[1.0]],
            "J": [[0.0]], "R": [[2.0]], "Z": [[1.0]], "G": [[1.0]]}

    bad = dict(base, extra=1)
    with pytest.raises(SystemFormatError, match="unknown keys"):
        read_system(json.dumps(bad))

    bad = {k: v for k, v in base.items() if k != "R"}
    with pytest.raises(SystemFormatError, match="missing keys"):
        read_system(json.dumps(bad))

    bad = dict(base, kind="other")
    with pytest.raises(SystemFormatError, match="kind"):
        read_system(json.dumps(bad))

    bad = dict(base, H=[[1.0, 0.0]])
    with pytest.raises(SystemFormatError, match="shape"):
        read_system(json.dumps(bad))

    bad = dict(base, H=[[1.0], [2.0, 3.0]])
    with pytest.raises(SystemFormatError, match='"H"'):
        read_system(json.dumps(bad))

    bad = dict(base, n=1.5)
    with pytest.raises(SystemFormatError, match='"n"'):
        read_system(json.dumps(bad))

    bad = dict(base, tau="soon")
    with pytest.raises(SystemFormatError, match='"tau"'):
        read_system(json.dumps(bad))

    with pytest.raises(SystemFormatError, match="malformed JSON"):
        read_system("{not json")


def test_read_rejects_non_finite_entries():
    text = ('{"kind": "standard_lti", "n": 1, "m": 1, '
            '"A": [[Infinity]], "B": [[1.0]], "C": [[1.0]]}')
    with pytest.raises(SystemFormatError, match="non-finite"):
        read_system(text)


def test_read_validates_invariants():
    doc = {"kind": "delay_ph", "n": 1, "m": 1, "tau": 1.0, "H": [[-1.0]],
           "J": [[0.0]], "R": [[2.0]], "Z": [[1.0]], "G": [[1.0]]}
    with pytest.raises(SystemValidationError) as err:
        read_system(json.dumps(doc))
    assert any("H is not positive definite" in v for v in err.value.violations)
    # diagnostics mode returns the object anyway
    sys1 = read_system(json.dumps(doc), validated=False)
    assert isinstance(sys1, DelayPHSystem)


def test_read_all_kinds(tmp_path):
    docs = {
        "standard_lti": {"kind": "standard_lti", "n": 1, "m": 1,
                         "A": [[-1.0]], "B": [[1.0]], "C": [[1.0]]},
        "standard_ph": {"kind": "standard_ph", "n": 1, "m": 1, "H": [[1.0]],
                        "J": [[0.0]], "R": [[1.0]], "G": [[1.0]]},
        "general_delay": {"kind": "general_delay", "n": 1, "m": 1,
                          "tau": 2.0, "A0": [[-1.0]], "A1": [[-0.5]],
                          "B": [[1.0]], "C": [[1.0]]},
    }
    expected = {
        "standard_lti": StandardLTISystem,
        "standard_ph": StandardPHSystem,
        "general_delay": GeneralDelaySystem,
    }
    for kind, doc in docs.items():
        sys1 = read_system(json.dumps(doc))
        assert isinstance(sys1, expected[kind])
        assert write_system(sys1) == write_system(read_system(write_system(sys1)))
