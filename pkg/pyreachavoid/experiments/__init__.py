from .batch import BatchRecord, BatchStatistics, run_batch, safety_flags, solve_start
from .directory import ENV_VAR, OutputDirectory
from .plot import emit_plot
from .sweep import ReactionRecord, min_separation, reaction_sweep
