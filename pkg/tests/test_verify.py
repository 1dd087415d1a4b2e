import pytest

from beltrami_dirichlet import transforms, verify


def test_check_row_format():
    row = verify.CheckResult("demo", True, 1e-5, 1e-4, 0.25).row()
    assert row.startswith("PASS  demo")
    assert verify.CheckResult("demo", False, 1.0, 1e-4, 0.0).row().startswith("FAIL")


def test_unknown_fault_rejected():
    with pytest.raises(ValueError):
        with verify.injected("cauchy"):
            pass


def test_fault_is_scoped():
    original = transforms._beurling_multiplier
    with verify.injected("beurling"):
        assert transforms._beurling_multiplier is not original
    assert transforms._beurling_multiplier is original


def test_fault_breaks_isometry():
    assert verify.beurling_isometry(64) < 1e-10
    with verify.injected("beurling"):
        assert verify.beurling_isometry(64) > 1e-2


def test_unknown_level_rejected():
    with pytest.raises(ValueError):
        verify.suite("medium")


def test_full_suite_extends_fast():
    fast = [name for name, _, _ in verify.suite("fast")]
    full = [name for name, _, _ in verify.suite("full")]
    assert full[:len(fast)] == fast and len(full) > len(fast)


def test_crashing_check_is_a_failure(monkeypatch):
    def boom():
        raise RuntimeError("no")
    monkeypatch.setattr(verify, "suite", lambda level: [("boom", boom, 1.0)])
    lines = []
    results = verify.run("fast", out=lines.append)
    assert not results[0].passed
    assert lines[0].startswith("ERROR boom")
