"""End-to-end segmentation: features → transitions, seeds → s, diffusion → labels"""

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Literal, Optional

import numpy as np

from .core.grid import NodeGrid
from .core.settings import EngineConfig
from .core.types import Image, LabelMap, ScoreMap
from .diffusion.cascade import CascadeParams, CascadeState
from .diffusion.solvers import CascadeSolver, ClosedFormSolver, mean_transition
from .errors import DiffusionSegError, ShapeMismatchError
from .features.provider import FeatureProvider, HandcraftedProvider
from .features.pyramid import FeaturePyramid
from .io.manifest import RunManifest
from .metrics import argmax_labels
from .seed.importance import ImportanceHead, ImportanceMap, InfluenceMap, importance, influence, make_seed
from .seed.seeds import PixelSeed, block_vote, rasterize_seeds
from .similarity.projection import default_projections
from .similarity.transitions import TransitionMatrix, build_transitions
from .utils.logger import DiffusionLogger, get_logger

logger = get_logger("pipeline")

SegmentMode = Literal["cascade", "closed-form"]


@dataclass
class SegmentationResult:
    """Every intermediate of one run, for output, visualization and evaluation."""

    grid: NodeGrid
    image_shape: tuple
    x: ScoreMap
    importance: ImportanceMap
    influence: InfluenceMap
    seed: ScoreMap
    transitions: List[TransitionMatrix]
    prediction: ScoreMap
    labels: LabelMap
    pyramid: Optional[FeaturePyramid] = None
    state: Optional[CascadeState] = None
    timings: Dict[str, float] = field(default_factory=dict)

    def seed_only_labels(self) -> LabelMap:
        """Argmax of the raw seed score map, the no-diffusion baseline."""
        return argmax_labels(self.x)

    def stage_predictions(self) -> List[ScoreMap]:
        """y^1..y^T of the executed stages (empty for closed-form runs)."""
        if self.state is None or self.state.trace is None:
            return []
        return list(self.state.trace[1:])


class SegmentationPipeline:
    """Wires the feature, similarity, seed and diffusion branches together"""

    def __init__(
        self,
        cfg: EngineConfig,
        params: Optional[CascadeParams] = None,
        head: Optional[ImportanceHead] = None,
        provider: Optional[FeatureProvider] = None,
        workers: Optional[int] = None,
    ):
        self.cfg = cfg
        self.params = params or CascadeParams.initial(cfg.num_stages)
        self.head = head or ImportanceHead.zeros(cfg.num_classes)
        self.provider = provider or HandcraftedProvider()
        self.workers = workers
        if self.params.stages != cfg.num_stages:
            raise ShapeMismatchError(
                f"parameters for {self.params.stages} stages, configuration has {cfg.num_stages}"
            )
        if self.head.classes != cfg.num_classes:
            raise ShapeMismatchError(
                f"importance head for {self.head.classes} classes, configuration has {cfg.num_classes}"
            )

    @staticmethod
    @contextmanager
    def _timed(timings: Dict[str, float], phase: str):
        start = time.perf_counter()
        yield
        timings[phase] = time.perf_counter() - start

    def run(
        self,
        image: Optional[Image],
        pixel_seeds: Iterable[PixelSeed],
        mode: SegmentMode = "cascade",
    ) -> SegmentationResult:
        """
        Segment one image from image-resolution seeds.

        Args:
            image: Input image (may be None when the provider serves stored features)
            pixel_seeds: Seeds at image resolution, voted onto the node grid
            mode: "cascade" or "closed-form" on the mean stage transition matrix

        Returns:
            SegmentationResult with per-phase timings in seconds
        """
        DiffusionLogger.log_function_entry(logger, "run", mode=mode)
        timings: Dict[str, float] = {}

        with self._timed(timings, "features"):
            pyramid = self.provider.pyramid(image, self.cfg)
        height, width = pyramid.shape
        grid = NodeGrid.for_image(height, width, self.cfg.downsample_factor)

        with self._timed(timings, "similarity"):
            projections = default_projections(pyramid.dims, self.cfg)
            transitions = build_transitions(pyramid, projections, grid, self.cfg, self.workers)

        with self._timed(timings, "seed"):
            seeds = block_vote(pixel_seeds, grid, height, width)
            x = rasterize_seeds(seeds, grid, self.cfg.num_classes)
            m = importance(x, self.head, grid)
            s = make_seed(x, m)

        with self._timed(timings, "diffusion"):
            state = None
            if mode == "closed-form":
                prediction = self._closed_form(s, transitions)
            else:
                outcome = CascadeSolver(self.cfg, self.params).solve(s, transitions, keep_trace=True)
                if not outcome["success"]:
                    raise DiffusionSegError(outcome["error"])
                prediction, state = outcome["prediction"], outcome["state"]

        labels = argmax_labels(prediction)
        logger.info(
            f"Segmented {height}x{width} image on a {grid.height}x{grid.width} grid "
            f"({len(seeds)} seeded nodes, mode={mode})"
        )
        DiffusionLogger.log_function_exit(logger, "run", result=timings)
        return SegmentationResult(
            grid=grid,
            image_shape=(height, width),
            x=x,
            importance=m,
            influence=influence(x),
            seed=s,
            transitions=transitions,
            prediction=prediction,
            labels=labels,
            pyramid=pyramid,
            state=state,
            timings=timings,
        )

    def _closed_form(self, s: ScoreMap, transitions: List[TransitionMatrix]) -> ScoreMap:
        active = self.cfg.active_stages()
        if not active:
            return s
        mu, _ = self.params.effective()
        mu_bar = float(np.mean([mu[t - 1] for t in active]))
        p_bar = mean_transition([transitions[t - 1] for t in active])
        outcome = ClosedFormSolver(mu_bar).solve(s, p_bar)
        if not outcome["success"]:
            raise DiffusionSegError(outcome["error"])
        logger.debug(outcome["solver_log"])
        return outcome["prediction"]

    def manifest(
        self,
        result: SegmentationResult,
        inputs: Dict[str, str],
        outputs: Dict[str, str],
        params_path: Optional[str] = None,
    ) -> RunManifest:
        mu, beta = self.params.effective()
        return RunManifest(
            config=self.cfg.model_dump(),
            inputs=inputs,
            params_path=params_path,
            mu=[float(v) for v in mu],
            beta=[float(v) for v in beta],
            timings=result.timings,
            outputs=outputs,
        )
