import pytest

from solnoise.validate import format_table, run_validation


@pytest.fixture(scope="module")
def results():
    return run_validation()


def test_all_invariants_pass(results):
    failing = [r.name for r in results if not r.passed]
    assert not failing, f"failing checks: {failing}"


def test_table_formatting(results):
    table = format_table(results)
    assert "PASS" in table
    assert len(table.splitlines()) == len(results)


def test_wrong_noise_scaling_detected():
    # negative control: the calibration check must catch a mis-scaled draw
    results = run_validation(noise_scale=1.1)
    by_name = {r.name: r for r in results}
    assert not by_name["noise variance calibration"].passed
    others = [r for name, r in by_name.items() if name != "noise variance calibration"]
    assert all(r.passed for r in others)
