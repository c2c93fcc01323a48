from .census import ParameterCensus, ParameterEntry
from .config import (
    LABEL_RANGES,
    DatasetName,
    DatasetSpec,
    DecoderKind,
    ExportSettings,
    FeatureKind,
    LossSchedule,
    ModelConfig,
    OptimizerSettings,
    RunConfig,
    ScheduleMode,
    SeedSettings,
    TrainingSettings,
)
from .metrics import MetricSummary, MetricsReport
from .training import CSV_COLUMNS, TrainRecord

__all__ = [
    "ParameterCensus",
    "ParameterEntry",
    "LABEL_RANGES",
    "DatasetName",
    "DatasetSpec",
    "DecoderKind",
    "ExportSettings",
    "FeatureKind",
    "LossSchedule",
    "ModelConfig",
    "OptimizerSettings",
    "RunConfig",
    "ScheduleMode",
    "SeedSettings",
    "TrainingSettings",
    "MetricSummary",
    "MetricsReport",
    "CSV_COLUMNS",
    "TrainRecord",
]
