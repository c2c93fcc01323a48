from typing import Optional

from pydantic import BaseModel, Field, field_validator

CSV_COLUMNS = ("epoch", "rec_loss", "kl_loss", "total_loss", "beta_t", "C_t", "seconds")


class TrainRecord(BaseModel):
    """Per-epoch means of the logged losses"""
    epoch: int = Field(..., ge=1)
    rec_loss: float
    kl_loss: float = 0.0
    total_loss: float
    beta_t: float = 1.0
    C_t: float = 0.0
    seconds: float = 0.0
    # Eval-mode reconstruction loss on the held snapshot; not written to the CSV
    eval_rec_loss: Optional[float] = None

    @field_validator("rec_loss", "kl_loss", "total_loss")
    @classmethod
    def finite(cls, value: float) -> float:
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError("losses must be finite")
        return value

    def csv_row(self) -> list[str]:
        return [str(self.epoch)] + [repr(float(getattr(self, name))) for name in CSV_COLUMNS[1:]]
