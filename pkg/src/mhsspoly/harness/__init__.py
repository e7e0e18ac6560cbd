"""Problem construction, Matrix Market I/O and benchmark reporting."""

from .mmio import read_matrix_market, write_matrix_market
from .problems import pair_and_pad, synthetic_problem
from .runner import BenchmarkSpec, run_benchmark

__all__ = ["read_matrix_market", "write_matrix_market", "pair_and_pad", "synthetic_problem",
           "BenchmarkSpec", "run_benchmark"]
