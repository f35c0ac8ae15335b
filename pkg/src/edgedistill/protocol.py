"""Round-based orchestration of gated edge inference and cloud-side distillation.

One round: every camera delivers its images to its school's edge server; the
edge classifies them and uploads the low-confidence ones; the cloud labels the
uploads with the frozen teacher, builds the hierarchical global loss, takes a
single gradient step on the shared edge parameters and broadcasts them.
Baseline paradigms reuse the same loop with uploading or updating switched off.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import gate as gating
from .errors import ConfigurationError, InvalidParameterError, TrainingFailureError
from .metrics import accuracy, relative_accuracy, upload_proportion
from .models import ClassifierParams, ClassifierSpec, Sample, apply_update, logits_batch, weighted_loss_and_grad
from .network import DelayLedger, LinkConfig, average_delay, sample_delay
from .numerics import softmax_batch

log = logging.getLogger(__name__)


class Paradigm(str, enum.Enum):
    PURE_EDGE = "pure-edge"
    PURE_CLOUD = "pure-cloud"
    COLLAB_NO_UPDATE = "collab-no-update"
    C3EKD = "c3ekd"

    @property
    def gated(self) -> bool:
        return self in (Paradigm.COLLAB_NO_UPDATE, Paradigm.C3EKD)


@dataclass(frozen=True)
class SimulationConfig:
    schools: int = 3
    cameras_per_school: tuple[int, ...] = (1, 1, 1)
    rounds: int = 60
    images_per_camera_per_round: int = 16
    tau: float = 0.2
    temperature: float = 2.0
    alpha: float = 0.5
    eta: float = 0.05
    seed: int = 0
    paradigm: Paradigm = Paradigm.C3EKD
    annotate_all_uploads: bool = False
    kd_t_squared: bool = False

    def __post_init__(self):
        object.__setattr__(self, "paradigm", Paradigm(self.paradigm))
        object.__setattr__(self, "cameras_per_school", tuple(int(j) for j in self.cameras_per_school))
        if self.schools < 1 or len(self.cameras_per_school) != self.schools:
            raise ConfigurationError("cameras_per_school needs one positive entry per school")
        if any(j < 1 for j in self.cameras_per_school):
            raise ConfigurationError("every school needs at least one camera")
        if self.rounds < 1 or self.images_per_camera_per_round < 1:
            raise ConfigurationError("rounds and images_per_camera_per_round must be positive")
        gating.check_tau(self.tau)
        if not self.temperature > 0:
            raise InvalidParameterError("temperature must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidParameterError("alpha must lie in [0, 1]")
        if not self.eta > 0:
            raise InvalidParameterError("eta must be positive")

    @property
    def cameras(self) -> list[tuple[int, int]]:
        return [(k, j) for k in range(self.schools) for j in range(self.cameras_per_school[k])]

    @property
    def stream_demand(self) -> int:
        return len(self.cameras) * self.images_per_camera_per_round * self.rounds


@dataclass(frozen=True)
class UploadRecord:
    sample: Sample
    camera: tuple[int, int]
    edge_soft: np.ndarray
    edge_hard: int


@dataclass(frozen=True)
class RoundReport:
    round: int
    uploads: int
    stream_count: int
    global_loss: float | None
    test_accuracy_framework: float
    test_accuracy_edge_standalone: float
    racc: float
    avg_delay_s: float
    upload_proportion_cumulative: float
    annotations: int = 0
    edge_version: int = 0


class AnnotationOracle:
    """Stands in for the clinician: returns ground truth and counts queries."""

    def __init__(self):
        self.queries = 0

    def __call__(self, sample: Sample) -> int:
        self.queries += 1
        return int(sample.label)


@dataclass
class Models:
    edge_spec: ClassifierSpec
    edge_params: ClassifierParams
    cloud_spec: ClassifierSpec
    cloud_params: ClassifierParams


@dataclass
class SimState:
    edge_params: ClassifierParams
    oracle: AnnotationOracle = field(default_factory=AnnotationOracle)
    ledger: DelayLedger = field(default_factory=DelayLedger)
    total_uploads: int = 0
    total_streamed: int = 0
    round: int = 0


@dataclass
class SimulationResult:
    config: SimulationConfig
    reports: list[RoundReport]
    summary: dict
    final_params: ClassifierParams


RoundPlan = dict[tuple[int, int], list[Sample]]


def stream_plan(config: SimulationConfig, simulation_set: Sequence[Sample]) -> list[RoundPlan]:
    """Shuffle the simulation set once and deal it out, round by round.

    Within a round, consecutive samples go round-robin across cameras in
    (school, camera) order, so each sample is streamed at most once.
    """
    demand = config.stream_demand
    if demand > len(simulation_set):
        raise ConfigurationError(
            f"stream needs {demand} samples but the simulation set holds {len(simulation_set)}"
        )
    order = np.random.default_rng(config.seed).permutation(len(simulation_set))
    cams = config.cameras
    per_round = len(cams) * config.images_per_camera_per_round
    plans = []
    for r in range(config.rounds):
        chunk = order[r * per_round:(r + 1) * per_round]
        plan: RoundPlan = {c: [] for c in cams}
        for t, idx in enumerate(chunk):
            s = simulation_set[idx]
            cam = cams[t % len(cams)]
            plan[cam].append(Sample(s.id, s.features, s.label, (cam[0], cam[1], r + 1)))
        plans.append(plan)
    return plans


class Simulator:
    """Runs one paradigm over pre-trained models and a fixed test set."""

    def __init__(self, config: SimulationConfig, models: Models, test_set: Sequence[Sample],
                 link: LinkConfig | None = None):
        self.config = config
        self.models = models
        self.link = link or LinkConfig()
        self.test_X = np.stack([s.features for s in test_set]) if test_set else np.empty((0, models.edge_spec.input_dim))
        self.test_y = np.array([s.label for s in test_set], dtype=np.int64)
        self.test_cloud_pred = (
            np.argmax(logits_batch(models.cloud_spec, models.cloud_params, self.test_X), axis=1)
            if len(test_set) else np.empty(0, dtype=np.int64)
        )
        self._tau = {
            Paradigm.PURE_EDGE: 0.0,
            Paradigm.PURE_CLOUD: None,
        }.get(config.paradigm, config.tau)

    def initial_state(self) -> SimState:
        return SimState(edge_params=self.models.edge_params)

    # Mechanism 1 -------------------------------------------------------

    def _route(self, P_edge: np.ndarray) -> np.ndarray:
        if self._tau is None:
            return np.ones(P_edge.shape[0], dtype=bool)
        return gating.upload_mask(gating.confidence_batch(P_edge), self._tau)

    def evaluate(self, params: ClassifierParams) -> tuple[float, float]:
        """(framework accuracy, edge standalone accuracy) on the test set."""
        P = softmax_batch(logits_batch(self.models.edge_spec, params, self.test_X))
        edge_pred = np.argmax(P, axis=1)
        routed = np.where(self._route(P), self.test_cloud_pred, edge_pred)
        return accuracy(routed, self.test_y), accuracy(edge_pred, self.test_y)

    # Mechanism 2 -------------------------------------------------------

    def _global_loss_step(self, state: SimState, uploads: list[UploadRecord]) -> tuple[float, ClassifierParams]:
        cfg, m = self.config, self.models
        T = cfg.temperature
        # canonical order keeps the sum independent of how inference was scheduled
        uploads = sorted(uploads, key=lambda u: (u.camera, u.sample.id))
        X = np.stack([u.sample.features for u in uploads])
        cloud_logits = logits_batch(m.cloud_spec, m.cloud_params, X)
        cloud_soft = softmax_batch(cloud_logits, T)
        cloud_hard = np.argmax(cloud_logits, axis=1)
        edge_hard = np.array([u.edge_hard for u in uploads])

        n = len(uploads)
        y_true = np.zeros(n, dtype=np.int64)
        kd_w = np.ones(n)
        ce_w = np.zeros(n)
        needs_label = np.ones(n, dtype=bool) if cfg.annotate_all_uploads else edge_hard != cloud_hard
        for i in np.flatnonzero(needs_label):
            y_true[i] = state.oracle(uploads[i].sample)
            kd_w[i] = cfg.alpha
            ce_w[i] = 1.0 - cfg.alpha
        if cfg.kd_t_squared:
            kd_w = kd_w * T * T

        row_w = self._hierarchical_weights([u.camera for u in uploads])
        loss, grad = weighted_loss_and_grad(
            m.edge_spec, state.edge_params, X, y_true, cloud_soft, kd_w, ce_w, T, row_w
        )
        if not math.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise TrainingFailureError(f"non-finite global loss in round {state.round + 1}")
        return loss, apply_update(state.edge_params, grad, cfg.eta)

    def _hierarchical_weights(self, cams: list[tuple[int, int]]) -> np.ndarray:
        # mean over uploads within a camera, then over cameras with uploads,
        # then over schools with uploads
        per_cam: dict[tuple[int, int], int] = {}
        for c in cams:
            per_cam[c] = per_cam.get(c, 0) + 1
        cams_per_school: dict[int, int] = {}
        for k, _ in per_cam:
            cams_per_school[k] = cams_per_school.get(k, 0) + 1
        n_schools = len(cams_per_school)
        return np.array([
            1.0 / n_schools / cams_per_school[c[0]] / per_cam[c] for c in cams
        ])

    # -------------------------------------------------------------------

    def run_round(self, state: SimState, plan: RoundPlan) -> tuple[SimState, RoundReport]:
        cfg, m = self.config, self.models
        uploads: list[UploadRecord] = []
        streamed = 0
        n_uploads = 0
        round_delays = []
        for cam in sorted(plan):
            samples = plan[cam]
            if not samples:
                continue
            X = np.stack([s.features for s in samples])
            Z = logits_batch(m.edge_spec, state.edge_params, X)
            P = softmax_batch(Z)
            up = self._route(P)
            if cfg.paradigm is Paradigm.C3EKD and np.any(up):
                P_soft = softmax_batch(Z[up], cfg.temperature)
                hard = np.argmax(P[up], axis=1)
                for s, soft, h in zip((s for s, u in zip(samples, up) if u), P_soft, hard):
                    uploads.append(UploadRecord(s, cam, soft, int(h)))
            n_uploads += int(up.sum())
            streamed += len(samples)
            round_delays.extend(sample_delay(bool(u), self.link) for u in up)

        state.round += 1
        state.total_streamed += streamed
        state.total_uploads += n_uploads
        state.ledger.extend(round_delays)

        queries_before = state.oracle.queries
        global_loss = None
        if cfg.paradigm is Paradigm.C3EKD and uploads:
            global_loss, state.edge_params = self._global_loss_step(state, uploads)

        fw_acc, edge_acc = self.evaluate(state.edge_params)
        report = RoundReport(
            round=state.round,
            uploads=n_uploads,
            stream_count=streamed,
            global_loss=global_loss,
            test_accuracy_framework=fw_acc,
            test_accuracy_edge_standalone=edge_acc,
            racc=relative_accuracy(edge_acc, fw_acc),
            avg_delay_s=math.fsum(round_delays) / len(round_delays),
            upload_proportion_cumulative=upload_proportion(state.total_uploads, state.total_streamed),
            annotations=state.oracle.queries - queries_before,
            edge_version=state.edge_params.version,
        )
        return state, report

    def run(self, simulation_set: Sequence[Sample], on_round=None) -> SimulationResult:
        """Play every round in order.  ``on_round(state, report)`` is called after each one."""
        plans = stream_plan(self.config, simulation_set)
        state = self.initial_state()
        reports = []
        for plan in plans:
            state, report = self.run_round(state, plan)
            reports.append(report)
            if on_round is not None:
                on_round(state, report)
            log.debug("round %d: uploads=%d fw=%.4f edge=%.4f", report.round, report.uploads,
                      report.test_accuracy_framework, report.test_accuracy_edge_standalone)
        return SimulationResult(self.config, reports, summarize(self.config, reports, state), state.edge_params)


def summarize(config: SimulationConfig, reports: Sequence[RoundReport], state: SimState) -> dict:
    last = reports[-1]
    return {
        "paradigm": config.paradigm.value,
        "tau": config.tau if config.paradigm.gated else None,
        "seed": config.seed,
        "rounds": len(reports),
        "accuracy": last.test_accuracy_framework,
        "edge_accuracy": last.test_accuracy_edge_standalone,
        "racc": last.racc,
        "upload_proportion": upload_proportion(state.total_uploads, state.total_streamed),
        "avg_delay_s": average_delay(state.ledger),
        "annotation_queries": state.oracle.queries,
        "edge_version": state.edge_params.version,
    }


def run_simulation(config: SimulationConfig, models: Models, simulation_set: Sequence[Sample],
                   test_set: Sequence[Sample], link: LinkConfig | None = None, on_round=None) -> SimulationResult:
    return Simulator(config, models, test_set, link).run(simulation_set, on_round)


def with_paradigm(config: SimulationConfig, paradigm: Paradigm | str, tau: float | None = None) -> SimulationConfig:
    return replace(config, paradigm=Paradigm(paradigm), tau=config.tau if tau is None else tau)
