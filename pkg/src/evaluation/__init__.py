from .dataset import QAExample, load_dataset, sample_examples
from .harness import EvalReport, EvalRow, aggregate, evaluate_example, render_table, run_eval, write_report
from .metrics import HITS_MODES, f1, hits_at_1, normalize
from .sweep import SWEEP_COLUMNS, run_sweep, sweep_config_path, sweep_grid, write_sweep_csv

__all__ = [
    "QAExample", "load_dataset", "sample_examples",
    "EvalReport", "EvalRow", "aggregate", "evaluate_example", "render_table", "run_eval", "write_report",
    "HITS_MODES", "f1", "hits_at_1", "normalize",
    "SWEEP_COLUMNS", "run_sweep", "sweep_config_path", "sweep_grid", "write_sweep_csv",
]
