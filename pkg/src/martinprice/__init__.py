"""Martingale pricing of derivatives in single-period incomplete markets."""

from .market import (
    ArbitrageCertificate,
    Derivative,
    LoadedMarket,
    MarketFormatError,
    MartingaleMeasure,
    PriceSystem,
    arrow_expand,
    detect_arbitrage,
    market_from_json,
    numerical_rank,
    price_under_measure,
    validate_price_system,
)
from .embedding import (
    AssemblyError,
    DualLP,
    GameEmbedding,
    REstimate,
    StandardFormLP,
    ZeroPriceLP,
    build_dual,
    build_game,
    estimate_r,
    to_standard_form,
)
from .simplex import (
    CrossoverDecision,
    InternalInconsistencyError,
    IterationLimitError,
    SimplexSolution,
    SingularBasisError,
    crossover_heuristic,
    extract_measure,
    solve,
)
from .zsg import (
    AdvantageReport,
    GameState,
    InfeasibleMarketError,
    PrecisionFloorError,
    ZsgPriceResult,
    effective_eps,
    gibbs_distribution,
    iteration_budget,
    play_game,
    price_absolute,
    price_absolute_batch,
    price_relative,
    quantum_advantage_report,
    sample_budget,
)
from .pseudoinverse import (
    NotLeastSquaresMarketError,
    PinvReport,
    gamma_kappa,
    pinv_price,
    pinv_solve,
)
from .bsm import (
    BsmSpec,
    DiscretizedBsm,
    RnLp,
    RnPriceInterval,
    analytic_price,
    build,
    build_rn_lp,
    call_payoff,
    girsanov_rn,
    put_payoff,
    rn_price_interval,
)
from .estimators import PinvPricer, SimplexPricer, ZsgPricer

__version__ = "0.1.0"

__all__ = [
    "AdvantageReport",
    "ArbitrageCertificate",
    "AssemblyError",
    "BsmSpec",
    "CrossoverDecision",
    "Derivative",
    "DiscretizedBsm",
    "DualLP",
    "GameEmbedding",
    "GameState",
    "InfeasibleMarketError",
    "InternalInconsistencyError",
    "IterationLimitError",
    "LoadedMarket",
    "MarketFormatError",
    "MartingaleMeasure",
    "NotLeastSquaresMarketError",
    "PinvPricer",
    "PinvReport",
    "PrecisionFloorError",
    "PriceSystem",
    "REstimate",
    "RnLp",
    "RnPriceInterval",
    "SimplexPricer",
    "SimplexSolution",
    "SingularBasisError",
    "StandardFormLP",
    "ZeroPriceLP",
    "ZsgPriceResult",
    "ZsgPricer",
    "analytic_price",
    "arrow_expand",
    "build",
    "build_dual",
    "build_game",
    "build_rn_lp",
    "call_payoff",
    "crossover_heuristic",
    "detect_arbitrage",
    "effective_eps",
    "estimate_r",
    "extract_measure",
    "gamma_kappa",
    "gibbs_distribution",
    "girsanov_rn",
    "iteration_budget",
    "market_from_json",
    "numerical_rank",
    "pinv_price",
    "pinv_solve",
    "play_game",
    "price_absolute",
    "price_absolute_batch",
    "price_relative",
    "price_under_measure",
    "put_payoff",
    "quantum_advantage_report",
    "rn_price_interval",
    "sample_budget",
    "solve",
    "validate_price_system",
    "__version__",
]
