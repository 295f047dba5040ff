import pytest

from ricci_dynamo.verification import FAULTS, run_suite


@pytest.fixture(scope="module")
def results():
    return run_suite()


def test_default_suite_passes(results):
    failed = [r.name for r in results if not r.passed]
    assert failed == []
    assert len({r.name for r in results}) == len(results)


def test_suite_is_deterministic(results):
    again = run_suite()
    assert [r.as_dict() for r in again] == [r.as_dict() for r in results]


def test_theta_fault_breaks_reconstruction():
    assert "theta_sign" in FAULTS
    by_name = {r.name: r for r in run_suite("theta_sign", modules=["kinematics"])}
    assert not by_name["decomposition_reconstruction"].passed
    assert by_name["shear_trace_free"].passed


def test_unknown_fault_rejected():
    with pytest.raises(ValueError):
        run_suite("everything")
