"""Glue between a RunConfig and the simulator: data, initial training, sweeps."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig
from .datagen import DatasetBundle, generate_synthetic, load_csv, split
from .metrics import accuracy
from .models import predict_batch, save_checkpoint, train_initial
from .protocol import Models, Paradigm, SimulationResult, run_simulation

log = logging.getLogger(__name__)


@dataclass
class Prepared:
    bundle: DatasetBundle
    models: Models

    def test_accuracy(self, which: str) -> float:
        spec, params = (
            (self.models.edge_spec, self.models.edge_params) if which == "edge"
            else (self.models.cloud_spec, self.models.cloud_params)
        )
        X = np.stack([s.features for s in self.bundle.test])
        y = np.array([s.label for s in self.bundle.test])
        return accuracy(predict_batch(spec, params, X)[0], y)


def derived_seeds(seed: int) -> dict[str, int]:
    """Independent sub-seeds for data generation, splitting and each model's init."""
    children = np.random.SeedSequence(seed).spawn(4)
    names = ("data", "split", "edge_init", "cloud_init")
    return {n: int(c.generate_state(1)[0]) for n, c in zip(names, children)}


def build_dataset(cfg: RunConfig) -> DatasetBundle:
    seeds = derived_seeds(cfg.seed)
    d = cfg.data
    if d.csv:
        samples = load_csv(d.csv)
    else:
        samples = generate_synthetic(
            d.n, d.feature_dim, seeds["data"], d.task,
            sigma=d.sigma, minor_fraction=d.minor_fraction, minor_offset=d.minor_offset,
        )
    return split(samples, d.fractions, seeds["split"])


def prepare(cfg: RunConfig) -> Prepared:
    """Generate or load data and train the edge and cloud models once."""
    seeds = derived_seeds(cfg.seed)
    bundle = build_dataset(cfg)
    dim = bundle.feature_dim
    e, c = cfg.edge_model, cfg.cloud_model
    edge_spec, cloud_spec = e.spec(dim), c.spec(dim)
    edge_params = train_initial(edge_spec, bundle.train, e.epochs, e.lr, seeds["edge_init"], e.init_scale)
    cloud_params = train_initial(cloud_spec, bundle.train, c.epochs, c.lr, seeds["cloud_init"], c.init_scale)
    prepared = Prepared(bundle, Models(edge_spec, edge_params, cloud_spec, cloud_params))
    log.info("seed %d: edge test acc %.4f, cloud test acc %.4f", cfg.seed,
             prepared.test_accuracy("edge"), prepared.test_accuracy("cloud"))
    return prepared


def run(cfg: RunConfig, prepared: Prepared | None = None, paradigm=None, tau: float | None = None,
        checkpoint_dir=None) -> SimulationResult:
    """Run one paradigm.  Checkpoints are written only when ``checkpoint_dir`` is given
    and ``cfg.output.checkpoint_every`` is positive."""
    prepared = prepared or prepare(cfg)
    sim = cfg.simulation
    changes = {}
    if paradigm is not None:
        changes["paradigm"] = Paradigm(paradigm)
    if tau is not None:
        changes["tau"] = tau
    if changes:
        sim = dataclasses.replace(sim, **changes)
    hook = None
    every = cfg.output.checkpoint_every
    if checkpoint_dir is not None and every > 0:
        ckpt = Path(checkpoint_dir)
        ckpt.mkdir(parents=True, exist_ok=True)
        ext = "json" if cfg.output.checkpoint_format == "json" else "bin"
        tag = sim.paradigm.value if not sim.paradigm.gated else f"{sim.paradigm.value}_tau{sim.tau:g}"

        def hook(state, report):
            if report.round % every == 0:
                save_checkpoint(ckpt / f"{tag}_round{report.round:03d}.{ext}", prepared.models.edge_spec,
                                state.edge_params, cfg.output.checkpoint_format)

    return run_simulation(sim, prepared.models, prepared.bundle.simulation, prepared.bundle.test, cfg.link, hook)


def paradigm_grid(taus) -> list[tuple[Paradigm, float | None]]:
    """Table-style grid: the two ungated baselines, then each gated paradigm at every tau."""
    grid: list[tuple[Paradigm, float | None]] = [(Paradigm.PURE_EDGE, None), (Paradigm.PURE_CLOUD, None)]
    for p in (Paradigm.COLLAB_NO_UPDATE, Paradigm.C3EKD):
        grid.extend((p, float(t)) for t in taus)
    return grid


def sweep(cfg: RunConfig, taus, prepared: Prepared | None = None, checkpoint_dir=None) -> list[SimulationResult]:
    prepared = prepared or prepare(cfg)
    return [run(cfg, prepared, p, t, checkpoint_dir) for p, t in paradigm_grid(taus)]
