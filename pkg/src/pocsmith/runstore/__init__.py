from .costing import (
    ModelPrice,
    PriceTable,
    UsageRecord,
    compute_cost,
    exact_cost_usd,
    format_cost,
)
from .hub import MemoryHub, parse_doc_id
from .runs import RunDir, RunRecord, create_run, list_runs, mint_run_id, open_run

__all__ = [
    "ModelPrice",
    "PriceTable",
    "UsageRecord",
    "compute_cost",
    "exact_cost_usd",
    "format_cost",
    "MemoryHub",
    "parse_doc_id",
    "RunDir",
    "RunRecord",
    "create_run",
    "list_runs",
    "mint_run_id",
    "open_run",
]
