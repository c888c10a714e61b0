"""Subsampled and inexact Newton methods for finite-sum strongly convex
objectives, with a logistic-regression experiment harness."""

from .dataset import Dataset, SplitDataset, load_csv, load_libsvm, \
    rescale_for_sgi, save_libsvm, split, synthesize
from .kernels import BACKEND
from .linsolve import CGReport, LinearOperator, cg_solve, \
    cg_worst_case_bound, sgi_iteration_budget, sgi_solve
from .objective import Counters, IndexSet, LogisticObjective
from .optimize import Budget, CGConfig, LineSearchParams, MethodConfig, \
    RunRecord, SGIConfig, armijo_search, reference_minimizer, run
from .sampling import SampleSchedule, draw, full_schedule

__all__ = [
    "BACKEND", "Budget", "CGConfig", "CGReport", "Counters", "Dataset",
    "IndexSet", "LineSearchParams", "LinearOperator", "LogisticObjective",
    "MethodConfig", "RunRecord", "SGIConfig", "SampleSchedule",
    "SplitDataset", "armijo_search", "cg_solve", "cg_worst_case_bound",
    "draw", "full_schedule", "load_csv", "load_libsvm", "reference_minimizer",
    "rescale_for_sgi", "run", "save_libsvm", "sgi_iteration_budget",
    "sgi_solve", "split", "synthesize",
]
