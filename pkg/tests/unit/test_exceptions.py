import pickle

from rescont.exceptions import (
    ArgumentOverflowError,
    ConfigError,
    CorrectorDivergenceError,
    DerivativeDegenerateError,
    DivisionDegenerateError,
    DomainError,
    NoConvergenceError,
    NullSpaceRankError,
    NumericalError,
    PointBudgetExceededError,
    RefinementFailureError,
    RescontError,
    SingularMatchingError,
    SingularPropagationError,
    StepUnderflowError,
)


class TestExceptions:
    def test_config_error_is_value_error(self):
        err = ConfigError("must be positive", "grid.r_max")
        assert isinstance(err, RescontError)
        assert isinstance(err, ValueError)
        assert not isinstance(err, NumericalError)

    def test_config_error_names_field(self):
        err = ConfigError("must be positive", "grid.r_max")
        assert err.field == "grid.r_max"
        assert str(err) == "grid.r_max: must be positive"

    def test_numerical_errors_share_base(self):
        errors = [
            DomainError("singular", "riccati_n", 0j),
            ArgumentOverflowError("overflow", 800j, 709.8),
            SingularPropagationError("singular", 1.0, node=12),
            SingularMatchingError("singular", 1.0),
            DivisionDegenerateError("pole", 1.0, 0.0),
            NoConvergenceError("no", 1.0, 50, 1e-3),
            DerivativeDegenerateError("flat", 1.0, 0j),
            CorrectorDivergenceError("diverged", 1e-3, 1.0),
            StepUnderflowError("underflow", 5e-5, 1e-4),
            RefinementFailureError("failed", (6.0, 6.2)),
            NullSpaceRankError("rank", (1.0, 0.5)),
            PointBudgetExceededError("budget", 0, 10, 11),
        ]
        for err in errors:
            assert isinstance(err, NumericalError)
            assert isinstance(err, RescontError)

    def test_domain_and_overflow_keep_builtin_bases(self):
        assert isinstance(DomainError("x", "riccati_h", 0j), ValueError)
        assert isinstance(ArgumentOverflowError("x", 800j, 709.8), OverflowError)

    def test_no_convergence_str(self):
        err = NoConvergenceError("no", 2.1 + 0.1j, 50, 3.2e-4)
        assert "50 iterations" in str(err)
        assert "3.200e-04" in str(err)

    def test_step_underflow_str(self):
        err = StepUnderflowError("underflow", 5e-5, 1e-4)
        assert "5.000e-05" in str(err)
        assert "1.000e-04" in str(err)

    def test_point_budget_carries_metadata(self):
        err = PointBudgetExceededError("budget", branch_id=2, max_points=10, current_point=11)
        assert err.branch_id == 2
        assert err.max_points == 10
        assert err.current_point == 11
        assert "11 / 10" in str(err)

    def test_singular_propagation_carries_node(self):
        err = SingularPropagationError("singular", 0.5j, node=7)
        assert err.k == 0.5j
        assert err.node == 7

    def test_exceptions_pickle(self):
        errors = [
            ConfigError("must be positive", "grid.r_max"),
            NoConvergenceError("no", 1.0 + 2.0j, 50, 1e-3),
            PointBudgetExceededError("budget", 0, 10, 11),
            RefinementFailureError("failed", (6.0, 6.2)),
            SingularPropagationError("singular", 1.0, node=3),
        ]
        for err in errors:
            restored = pickle.loads(pickle.dumps(err))
            assert type(restored) is type(err)
            assert str(restored) == str(err)
            assert restored.__dict__ == err.__dict__
