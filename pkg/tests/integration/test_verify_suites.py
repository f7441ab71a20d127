import pytest

from rlsForget.scenarios.verify import verify


@pytest.mark.integration
class TestVerifySuites:
    """Self-verification suites against the library (minutes)"""

    @pytest.fixture(scope="class")
    def oracle(self):
        return verify("oracle")

    @pytest.fixture(scope="class")
    def bounds(self):
        return verify("bounds")

    def test_oracle_suite_passes(self, oracle):
        assert oracle.passed, "\n".join(c.line() for c in oracle.failures)
        assert len(oracle.checks) >= 8

    def test_invariants_suite_passes(self):
        report = verify("invariants")
        assert report.passed, "\n".join(c.line() for c in report.failures)
        names = [c.name for c in report.checks]
        assert any("first-order-noise" in name for name in names)
        assert any(name.startswith("invariants: arx5-vdf-slow") for name in names)

    def test_bounds_suite_passes(self, bounds):
        assert bounds.passed, "\n".join(c.line() for c in bounds.failures)
        assert any(c.name.startswith("bounds: uniform_forgetting") for c in bounds.checks)

    def test_corrupted_lambda_is_caught(self):
        report = verify("bounds", corrupt_lambda=0.9999)
        assert not report.passed
        assert any(c.name.startswith("bounds: uniform_forgetting") for c in report.failures)
        assert "0.9999" in report.render()

    def test_unknown_suite_rejected(self):
        with pytest.raises(ValueError):
            verify("everything")
        with pytest.raises(ValueError):
            verify("bounds", corrupt_lambda=1.5)
