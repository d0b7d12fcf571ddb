from .errors import (
    EconodynError,
    InvalidArgumentError,
    InvalidParametersError,
    SingularMatrixError,
    NoConvergenceError,
    DegenerateStepError,
    CharacteristicLambdaError,
    HorizonExceededError,
    UndefinedHorizonError,
    NotContractiveError,
    ConfigError,
    ConfigNotFoundError,
)
from .models import (
    Settings,
    SolverReport,
    Trajectory,
    NodeRecord,
    HealthReport,
    CriticalityEntry,
    CriticalityReport,
    HarrodParams,
    PhillipsParams,
    BalanceSpec,
    VariantSpec,
    Scenario,
)
from .numcore import Grid, BlockGrid, make_uniform_grid, make_block_grid
from .volterra import VolterraProblem, VolterraSystem
from .fredholm import (
    DiagonalRule,
    PiecewiseKernel,
    FredholmProblem,
    StackedFredholmProblem,
    DiscreteResolvent,
)
from .balance import BalanceSystem, CauchyData, ForecastData, Variant

__version__ = "0.1.0"
__all__ = [
    "EconodynError",
    "InvalidArgumentError",
    "InvalidParametersError",
    "SingularMatrixError",
    "NoConvergenceError",
    "DegenerateStepError",
    "CharacteristicLambdaError",
    "HorizonExceededError",
    "UndefinedHorizonError",
    "NotContractiveError",
    "ConfigError",
    "ConfigNotFoundError",
    "Settings",
    "SolverReport",
    "Trajectory",
    "NodeRecord",
    "HealthReport",
    "CriticalityEntry",
    "CriticalityReport",
    "HarrodParams",
    "PhillipsParams",
    "BalanceSpec",
    "VariantSpec",
    "Scenario",
    "Grid",
    "BlockGrid",
    "make_uniform_grid",
    "make_block_grid",
    "VolterraProblem",
    "VolterraSystem",
    "DiagonalRule",
    "PiecewiseKernel",
    "FredholmProblem",
    "StackedFredholmProblem",
    "DiscreteResolvent",
    "BalanceSystem",
    "CauchyData",
    "ForecastData",
    "Variant",
]
