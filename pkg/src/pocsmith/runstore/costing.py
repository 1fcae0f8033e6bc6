"""Token-cost accounting.

Arithmetic happens in exact Decimal micro-dollars so that cost is
additive over any split of the usage list; rounding (cents, half-up)
only happens at presentation time.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from ..errors import UnpricedModel


@dataclass(frozen=True)
class UsageRecord:
    model: str
    input_tokens: int
    output_tokens: int
    agent_role: str = ""
    node_index: int = -1

    def __post_init__(self) -> None:
        if self.input_tokens < 0 or self.output_tokens < 0:
            raise ValueError("token counts are non-negative")


@dataclass(frozen=True)
class ModelPrice:
    input_usd_per_million: Decimal
    output_usd_per_million: Decimal

    def __post_init__(self) -> None:
        if self.input_usd_per_million < 0 or self.output_usd_per_million < 0:
            raise ValueError("prices are non-negative")


class PriceTable:
    def __init__(self, prices: dict[str, ModelPrice] | None = None):
        self._prices = dict(prices or {})

    @classmethod
    def from_mapping(cls, raw: dict) -> "PriceTable":
        prices = {}
        for model, entry in raw.items():
            prices[model] = ModelPrice(
                input_usd_per_million=Decimal(str(entry["input_per_m"])),
                output_usd_per_million=Decimal(str(entry["output_per_m"])),
            )
        return cls(prices)

    def get(self, model: str) -> ModelPrice:
        if model not in self._prices:
            raise UnpricedModel(model)
        return self._prices[model]

    def models(self) -> list[str]:
        return sorted(self._prices)


def exact_cost_usd(usage: list[UsageRecord], prices: PriceTable) -> Decimal:
    """Unrounded total: sum of tokens/1e6 * price, exact in Decimal."""
    total = Decimal(0)
    million = Decimal(1_000_000)
    for record in usage:
        price = prices.get(record.model)
        total += (
            Decimal(record.input_tokens) * price.input_usd_per_million
            + Decimal(record.output_tokens) * price.output_usd_per_million
        ) / million
    return total


def compute_cost(usage: list[UsageRecord], prices: PriceTable) -> Decimal:
    """Total cost rounded to cents, half-up."""
    return exact_cost_usd(usage, prices).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)


def format_cost(amount: Decimal) -> str:
    return f"${amount:.2f}"
