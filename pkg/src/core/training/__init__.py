from .checkpoint import FORMAT_VERSION, TrainingState, load_checkpoint, restore_model, save_checkpoint
from .optimizer import OptimizerState, adam_step, clip_global_norm, global_norm
from .trainer import FINAL_CHECKPOINT, LOSS_CSV, snapshot_loss, train, train_ae, train_vae, write_loss_csv

__all__ = [
    "FORMAT_VERSION",
    "TrainingState",
    "load_checkpoint",
    "restore_model",
    "save_checkpoint",
    "OptimizerState",
    "adam_step",
    "clip_global_norm",
    "global_norm",
    "FINAL_CHECKPOINT",
    "LOSS_CSV",
    "snapshot_loss",
    "train",
    "train_ae",
    "train_vae",
    "write_loss_csv",
]
