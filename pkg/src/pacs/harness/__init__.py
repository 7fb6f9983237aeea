from .dataset import (
    DatasetError,
    DatasetRecord,
    bundled_path,
    load_dataset,
    load_dataset_with_diagnostics,
    parse_record,
    resolve_dataset,
)
from .evaluate import (
    METHODS,
    CountingSampler,
    EvalConfig,
    RecordResult,
    RunReport,
    TraceWriter,
    evaluate_record,
    population_factory,
    run_eval,
    sample_chain,
    scripted_factory,
    shared_factory,
)
from .metrics import MetricSet, compute_metrics, wilson_interval
