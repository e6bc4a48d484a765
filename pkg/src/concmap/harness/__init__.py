from .checker import Verdict, check_history, check_key_history
from .faults import FAULTS, DoubleRemoveMap, LostWriteMap, StaleReadMap
from .history import OpRecord, group_by_key, read_history, write_history
from .oracle import OracleMap, oracle_map
from .workload import (
    BenchConfig,
    BenchReport,
    BenchRow,
    StressResult,
    make_map,
    op_stream,
    run_bench,
    run_stress,
)

__all__ = [
    "BenchConfig", "BenchReport", "BenchRow", "DoubleRemoveMap", "FAULTS",
    "LostWriteMap", "OpRecord", "OracleMap", "StaleReadMap", "StressResult",
    "Verdict", "check_history", "check_key_history", "group_by_key",
    "make_map", "op_stream", "oracle_map", "read_history", "run_bench",
    "run_stress", "write_history",
]
