from typing import List, Optional

from pydantic import BaseModel, Field


class ParameterEntry(BaseModel):
    name: str
    group: str = Field(..., pattern="^(classical|quantum)$")
    shape: List[int]
    size: int


class ParameterCensus(BaseModel):
    """Trainable parameter counts of one model configuration."""
    entries: List[ParameterEntry]
    classical: int
    quantum: int
    total: int
    decoder_total: int
    # Set for QINR configurations: the classical-linear decoder built from the same config
    classical_decoder_total: Optional[int] = None
    classical_decoder_ratio: Optional[float] = None

    def by_module(self) -> dict[str, int]:
        """Counts per top-level submodule (``encoder``, ``decoder``, ...)."""
        counts: dict[str, int] = {}
        for entry in self.entries:
            head = entry.name.split(".")[0]
            counts[head] = counts.get(head, 0) + entry.size
        return counts
