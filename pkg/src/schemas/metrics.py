from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from src.schemas.config import SeedSettings


class MetricSummary(BaseModel):
    mean: float
    values: List[float] = []
    # Count of zero-vector pairs reported as 0 (cosine only)
    degenerate: int = 0


class MetricsReport(BaseModel):
    """JSON document written by ``evaluate``."""
    dataset: str
    class_filter: Optional[int] = Field(None, alias="class")
    config_hash: str
    seeds: SeedSettings
    checkpoint: Optional[str] = None
    protocol: Dict[str, str] = {}
    reconstruction: Dict[str, MetricSummary] = {}
    prior: Dict[str, MetricSummary] = {}

    model_config = ConfigDict(populate_by_name=True)
