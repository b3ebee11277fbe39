"""Task generators, end-to-end benchmark runs, domain scoring and the noise study."""

from .noise import NoiseTable, noise_study, perturb
from .pipeline import BenchReport, PipelineConfig, run_pipeline, run_task, suite
from .quality import DomainQuality, score_domain
from .tasks import CATEGORIES, Task, TaskSpec, SpecError, generate_task, reference_domain

__all__ = ["NoiseTable", "noise_study", "perturb", "BenchReport", "PipelineConfig", "run_pipeline", "run_task",
           "suite", "DomainQuality", "score_domain", "CATEGORIES", "Task", "TaskSpec", "SpecError",
           "generate_task", "reference_domain"]
