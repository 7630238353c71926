"""Model evaluation: prompting, answer extraction, scoring and aggregation."""
from .answers import (
    BaAnswer,
    BaMode,
    CpAnswer,
    ParseFailure,
    StateAnswer,
    Verdict,
    extract_answer,
    normalize_name,
    render_answer,
    score,
)
from .client import ChatClient, CredentialError, ModelEndpoint, RateLimiter, ResponseCache, TransportError, query_model
from .mocks import ChatTransport, GarbageMock, NegatingMock, OracleMock, make_mock
from .runner import DIMENSIONS, AccuracyTable, EvalResult, aggregate, read_results, run_eval, write_results
