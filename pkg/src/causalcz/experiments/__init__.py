from .appendix import AppendixSpec, run_appendix  # noqa: F401
from .exact_examples import run_example_2_1, run_example_2_3  # noqa: F401
from .randomized import (  # noqa: F401
    run_carleson_bound,
    run_domination,
    run_hormander,
    run_weak_l1,
)
from .report import ExperimentReport, Verdict  # noqa: F401
