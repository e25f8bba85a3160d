from .experiment import ExperimentConfig, bundled_configs, load_config, parse_float_list
from .compare import ComparisonReport, Profile, compare_densities, profile_deviation
from .csvio import read_csv, schema_line, write_csv, write_rows
from .runner import CheckResult, ComparisonRow, ExperimentReport, run_experiment
