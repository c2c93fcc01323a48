"""Epoch loops for the autoencoder and the variational autoencoder.

Random streams: ``seeds.init`` initialises the weights, ``seeds.data`` seeds
the shuffle of each epoch independently (so a resumed run sees the same
batches), and ``seeds.noise`` drives the reparameterisation draws; its state
is saved with every checkpoint.
"""
import csv
import logging
import time
from pathlib import Path
from typing import Optional

import numpy as np

from src.core.data import SampleSet, batches
from src.core.exceptions import CheckpointError, ConfigurationError, NumericError
from src.core.losses import bce_with_logits, kl_divergence, mse_loss, schedule_weights, total_loss
from src.core.neural import QUANTUM, Tensor, no_grad
from src.core.neural.functional import sigmoid
from src.core.training.checkpoint import TrainingState, restore_model, save_checkpoint
from src.core.training.optimizer import OptimizerState, adam_step, clip_global_norm
from src.models import HybridAutoencoder, build_model
from src.schemas.config import LossSchedule, RunConfig, SeedSettings
from src.schemas.training import CSV_COLUMNS, TrainRecord

logger = logging.getLogger(__name__)

LOSS_CSV = "losses.csv"
FINAL_CHECKPOINT = "final.ckpt"


def write_loss_csv(path, records: list[TrainRecord]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in records:
            writer.writerow(record.csv_row())
    return path


def reconstruction_loss(logits: Tensor, targets: np.ndarray, schedule: LossSchedule) -> Tensor:
    if schedule.reconstruction == "mse":
        return mse_loss(sigmoid(logits), targets)
    return bce_with_logits(logits, targets)


def snapshot_loss(model: HybridAutoencoder, samples: SampleSet, count: int, schedule: LossSchedule) -> float:
    """Eval-mode mean reconstruction loss over the first ``count`` samples."""
    snapshot = samples.subset(count)
    targets = ((snapshot.pixels + 1.0) / 2.0).reshape(len(snapshot), -1)
    was_training = model.training
    model.eval()
    try:
        with no_grad():
            logits, _ = model(snapshot.pixels)
            return reconstruction_loss(logits, targets, schedule).item()
    finally:
        model.train(was_training)


def _check_finite(value: float, what: str, epoch: int, batch: int) -> None:
    if not np.isfinite(value):
        raise NumericError(f"Non-finite {what} ({value}) at epoch {epoch}, batch {batch}")


def _fit(
    config: RunConfig,
    data: SampleSet,
    schedule: LossSchedule,
    seeds: SeedSettings,
    run_dir: Optional[Path],
    resume: Optional[TrainingState],
) -> tuple[HybridAutoencoder, list[TrainRecord]]:
    training = config.training
    variational = config.model.variational

    if resume is not None:
        if resume.config.model != config.model:
            raise CheckpointError("Checkpoint was trained with a different model configuration")
        model = restore_model(resume)
        named = list(model.named_parameters())
        optimizer = OptimizerState.create(named, config.optimizer)
        resume.restore_optimizer(optimizer)
        noise_rng = resume.restore_rng("noise") or np.random.default_rng(seeds.noise)
        records = list(resume.records)
        start = resume.epoch
        logger.info(f"Resuming from epoch {start}")
    else:
        model = build_model(config.model, np.random.default_rng(seeds.init))
        named = list(model.named_parameters())
        optimizer = OptimizerState.create(named, config.optimizer)
        noise_rng = np.random.default_rng(seeds.noise)
        records = []
        start = 0

    sizes = optimizer.group_sizes(named)
    logger.info(
        f"Training {'VAE' if variational else 'AE'} on {len(data)} samples for {training.epochs} epochs "
        f"(classical {sizes['classical']} params at lr {optimizer.lr['classical']}, "
        f"quantum {sizes[QUANTUM]} params at lr {optimizer.lr[QUANTUM]}, clip {config.optimizer.grad_clip})"
    )
    if run_dir is not None:
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)

    for epoch in range(start + 1, training.epochs + 1):
        started = time.perf_counter()
        beta_t, c_t = schedule_weights(epoch, schedule) if variational else (0.0, 0.0)
        sums = np.zeros(3)
        count = 0
        model.train()
        for index, batch in enumerate(
            batches(data, training.batch_size, epoch_seed=[seeds.data, epoch], shuffle=training.shuffle), 1
        ):
            model.zero_grad()
            targets = batch.targets.reshape(len(batch), -1)
            if variational:
                logits, latent = model(batch.pixels, rng=noise_rng)
                rec = reconstruction_loss(logits, targets, schedule)
                kl = kl_divergence(latent.mu, latent.logvar, schedule.free_bits)
                loss = total_loss(rec, kl, beta_t, c_t, schedule)
                kl_value = kl.item()
            else:
                logits, _ = model(batch.pixels)
                rec = reconstruction_loss(logits, targets, schedule)
                loss = rec
                kl_value = 0.0
            _check_finite(loss.item(), "loss", epoch, index)

            loss.backward()
            grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for _, p in named]
            grads = clip_global_norm(grads, config.optimizer.grad_clip, names=[name for name, _ in named])
            adam_step(optimizer, named, grads)

            sums += (rec.item(), kl_value, loss.item())
            count += 1
            logger.debug(f"epoch {epoch} batch {index}: loss {loss.item():.4f}")

        if count == 0:
            raise ConfigurationError(f"No batches of size >= 2 in {len(data)} samples")
        rec_mean, kl_mean, total_mean = sums / count
        record = TrainRecord(
            epoch=epoch,
            rec_loss=rec_mean,
            kl_loss=kl_mean,
            total_loss=total_mean,
            beta_t=beta_t,
            C_t=c_t,
            seconds=time.perf_counter() - started if training.record_wall_time else 0.0,
        )
        if training.eval_every and epoch % training.eval_every == 0:
            record.eval_rec_loss = snapshot_loss(model, data, min(training.eval_snapshot, len(data)), schedule)
        records.append(record)
        logger.info(
            f"Epoch {epoch}/{training.epochs}: rec {rec_mean:.4f} kl {kl_mean:.4f} total {total_mean:.4f} "
            f"beta {beta_t:.3f} C {c_t:.3f}"
            + (f" eval-rec {record.eval_rec_loss:.4f}" if record.eval_rec_loss is not None else "")
        )

        if run_dir is not None:
            write_loss_csv(run_dir / LOSS_CSV, records)
            if training.checkpoint_every and epoch % training.checkpoint_every == 0:
                save_checkpoint(
                    run_dir / "checkpoints" / f"epoch-{epoch:04d}.ckpt",
                    model, config, epoch, optimizer, {"noise": noise_rng}, records,
                )

    if run_dir is not None:
        write_loss_csv(run_dir / LOSS_CSV, records)
        save_checkpoint(
            run_dir / FINAL_CHECKPOINT,
            model, config, max(start, training.epochs), optimizer, {"noise": noise_rng}, records,
        )
    return model, records


def train_ae(
    config: RunConfig,
    data: SampleSet,
    seeds: Optional[SeedSettings] = None,
    run_dir=None,
    resume: Optional[TrainingState] = None,
) -> tuple[HybridAutoencoder, list[TrainRecord]]:
    """Deterministic autoencoder: BCE of the per-image pixel sums, batch-averaged."""
    if config.model.variational:
        raise ConfigurationError("train_ae needs model.variational = false")
    return _fit(config, data, config.loss, seeds or config.seeds, run_dir, resume)


def train_vae(
    config: RunConfig,
    data: SampleSet,
    schedule: Optional[LossSchedule] = None,
    seeds: Optional[SeedSettings] = None,
    run_dir=None,
    resume: Optional[TrainingState] = None,
) -> tuple[HybridAutoencoder, list[TrainRecord]]:
    """Variational autoencoder with the beta warm-up or capacity schedule computed per epoch."""
    if not config.model.variational:
        raise ConfigurationError("train_vae needs model.variational = true")
    return _fit(config, data, schedule or config.loss, seeds or config.seeds, run_dir, resume)


def train(config: RunConfig, data: SampleSet, run_dir=None, resume: Optional[TrainingState] = None):
    if config.model.variational:
        return train_vae(config, data, run_dir=run_dir, resume=resume)
    return train_ae(config, data, run_dir=run_dir, resume=resume)
