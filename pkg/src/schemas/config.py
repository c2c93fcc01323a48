import hashlib
import json
from enum import Enum
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.qsim.observables import ReadoutMode


class DatasetName(str, Enum):
    MNIST = "mnist"
    EMNIST_LETTERS = "emnist-letters"
    FASHION_MNIST = "fashion-mnist"


# Valid label range per dataset (emnist letters are case-merged 1..26).
LABEL_RANGES = {
    DatasetName.MNIST: range(0, 10),
    DatasetName.EMNIST_LETTERS: range(1, 27),
    DatasetName.FASHION_MNIST: range(0, 10),
}


class DecoderKind(str, Enum):
    QINR = "qinr"
    CLASSICAL_LINEAR = "classical-linear"


class ScheduleMode(str, Enum):
    CONSTANT = "constant"
    BETA_WARMUP = "beta-warmup"
    CAPACITY = "capacity"


class FeatureKind(str, Enum):
    RAW_PIXELS = "raw-pixels"
    PCA = "pca"


class DatasetSpec(BaseModel):
    """Which images to train on"""
    model_config = ConfigDict(extra="forbid")

    name: DatasetName = DatasetName.MNIST
    # None selects every class (all-classes regime)
    class_filter: Optional[int] = 1
    samples_per_class: int = Field(default=500, ge=1)
    split: Literal["train"] = "train"

    @model_validator(mode="after")
    def check_label(self) -> "DatasetSpec":
        if self.class_filter is not None and self.class_filter not in LABEL_RANGES[self.name]:
            valid = LABEL_RANGES[self.name]
            raise ValueError(
                f"class {self.class_filter} is not a label of {self.name.value} "
                f"(valid: {valid.start}..{valid.stop - 1})"
            )
        return self


class ModelConfig(BaseModel):
    """Architecture of the encoder and decoder.

    ``n_qubits``, ``n_layers`` and ``n_repeats`` are n_q, L (encoding layers) and
    K (Rot+CZ repetitions per parameter layer); ``latent_dim`` is d_z.
    """
    model_config = ConfigDict(extra="forbid")

    n_qubits: int = Field(default=6, ge=1, le=12)
    n_layers: int = Field(default=2, ge=1)
    n_repeats: int = Field(default=2, ge=1)
    latent_dim: int = Field(default=8, ge=1)
    v_dim: int = Field(default=128, ge=1)
    readout_widths: List[int] = Field(default_factory=lambda: [128, 512, 784])
    readout_mode: ReadoutMode = ReadoutMode.Z_ONLY
    global_scale: bool = False
    decoder_kind: DecoderKind = DecoderKind.QINR
    variational: bool = True
    classical_widths: Optional[List[int]] = None
    entangling: Optional[List[List[Tuple[int, int]]]] = None
    encoder_channels: List[int] = Field(default_factory=lambda: [32, 64, 128, 256])
    image_size: int = Field(default=28, ge=1)
    leaky_slope: float = Field(default=0.2, ge=0.0)
    bn_eps: float = Field(default=1e-5, gt=0.0)
    bn_momentum: float = Field(default=0.1, gt=0.0, lt=1.0)
    hybrid_layers: int = 1

    @field_validator("hybrid_layers")
    @classmethod
    def single_hybrid_layer(cls, value: int) -> int:
        if value != 1:
            raise ValueError("only one hybrid layer is implemented")
        return value

    @model_validator(mode="after")
    def check_widths(self) -> "ModelConfig":
        pixels = self.image_size * self.image_size
        if not self.readout_widths or self.readout_widths[-1] != pixels:
            raise ValueError(f"final readout width must equal the pixel count {pixels}")
        if self.classical_widths is not None and self.classical_widths[-1] != pixels:
            raise ValueError(f"final classical width must equal the pixel count {pixels}")
        if self.entangling is not None and len(self.entangling) != self.n_repeats:
            raise ValueError("entangling must list one edge set per repetition (n_repeats)")
        return self

    @property
    def pixel_count(self) -> int:
        return self.image_size * self.image_size

    @property
    def feature_width(self) -> int:
        return self.readout_mode.feature_width(self.n_qubits)

    @property
    def resolved_classical_widths(self) -> List[int]:
        if self.classical_widths is not None:
            return list(self.classical_widths)
        hidden = self.readout_widths[-2] if len(self.readout_widths) > 1 else self.v_dim
        return [self.v_dim, hidden, self.pixel_count]

    @property
    def quantum_parameter_count(self) -> int:
        count = (self.n_layers + 1) * self.n_repeats * self.n_qubits * 3
        count += self.n_layers * self.n_qubits
        return count + (1 if self.global_scale else 0)


class LossSchedule(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: ScheduleMode = ScheduleMode.BETA_WARMUP
    n_beta: int = Field(default=5, ge=1)
    c_max: float = Field(default=0.0, ge=0.0)
    n_c: int = Field(default=10, ge=1)
    gamma: float = Field(default=10.0, gt=0.0)
    free_bits: float = Field(default=0.0, ge=0.0)
    reconstruction: Literal["bce", "mse"] = "bce"


class OptimizerSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lr_classical: float = Field(default=0.002, gt=0.0)
    lr_quantum: float = Field(default=0.0002, gt=0.0)
    betas: Tuple[float, float] = (0.9, 0.999)
    eps: float = Field(default=1e-8, gt=0.0)
    grad_clip: float = Field(default=1.0, gt=0.0)


class TrainingSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(default=45, ge=0)
    batch_size: int = Field(default=32, ge=2)
    shuffle: bool = True
    checkpoint_every: int = Field(default=0, ge=0)
    eval_every: int = Field(default=0, ge=0)
    eval_snapshot: int = Field(default=64, ge=2)
    record_wall_time: bool = True


class SeedSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    init: int = Field(default=0, ge=0)
    data: int = Field(default=0, ge=0)
    noise: int = Field(default=0, ge=0)
    sample: int = Field(default=0, ge=0)


class ExportSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    png: bool = False
    grid_cols: Optional[int] = Field(default=None, ge=1)
    separator: int = Field(default=2, ge=0)
    feature_backend: FeatureKind = FeatureKind.PCA
    pca_components: int = Field(default=64, ge=1)
    prior_samples: int = Field(default=500, ge=1)


class RunConfig(BaseModel):
    """Everything a command needs; written back as config.json in the run directory"""
    model_config = ConfigDict(extra="forbid")

    dataset: DatasetSpec = Field(default_factory=DatasetSpec)
    model: ModelConfig = Field(default_factory=ModelConfig)
    loss: LossSchedule = Field(default_factory=LossSchedule)
    optimizer: OptimizerSettings = Field(default_factory=OptimizerSettings)
    training: TrainingSettings = Field(default_factory=TrainingSettings)
    seeds: SeedSettings = Field(default_factory=SeedSettings)
    export: ExportSettings = Field(default_factory=ExportSettings)
    output_dir: Optional[str] = None

    def config_hash(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json", exclude={"output_dir"}), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
