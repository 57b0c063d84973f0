"""Optimal alignments of partially ordered traces against Petri net models via directed unfoldings."""
from .aligner import (AlignmentOrder, Diagnostics, UAlignment, alignment_report, decompose, diagnose,
                      run_to_alignment_order)
from .baseline import astar_alignment, replay_sequence
from .engines import ENGINES, align_log, align_spn, run_engine
from .errors import AlignError, BudgetExceeded, InputError, ModelNotEasySound
from .heuristic import estimate_remaining
from .petri import TAU, SystemNet, enabled, fire, load_net, preset, postset, validate
from .product import CostModel, build_extended_product, extend_with_target, synchronous_product
from .ptrace import PTrace, RawEvent, derive_ptrace, load_log, ptrace_to_trace_net
from .unfolder import Budget, unfold
from .viz import order_to_dot, partition, render_svg

__version__ = "0.1.0"

__all__ = [
    "AlignError", "AlignmentOrder", "Budget", "BudgetExceeded", "CostModel", "Diagnostics", "ENGINES",
    "InputError", "ModelNotEasySound", "PTrace", "RawEvent", "SystemNet", "TAU", "UAlignment",
    "align_log", "align_spn", "alignment_report", "astar_alignment", "build_extended_product", "decompose",
    "derive_ptrace", "diagnose", "enabled", "estimate_remaining", "extend_with_target", "fire", "load_log",
    "load_net", "order_to_dot", "partition", "postset", "preset", "ptrace_to_trace_net", "render_svg",
    "replay_sequence", "run_engine", "run_to_alignment_order", "synchronous_product", "unfold", "validate",
]
