"""
Utils package: configuration documents, result files, run orchestration and error mapping
"""

from utils.config_parser import ConfigParser, parse_config, serialize_config, config_hash, DEFAULTS
from utils.output import write_profile, write_tunneling_report, write_epr_result, write_plot_script, read_profile
from utils.runner import run_experiment, apply_cli_overrides, read_manifest, TOOL_VERSION
from utils.error_handler import handle_error, exit_code_for, EXIT_OK, EXIT_CONFIG_ERROR, EXIT_RUNTIME_ERROR

__all__ = [
    'ConfigParser', 'parse_config', 'serialize_config', 'config_hash', 'DEFAULTS',
    'write_profile', 'write_tunneling_report', 'write_epr_result', 'write_plot_script', 'read_profile',
    'run_experiment', 'apply_cli_overrides', 'read_manifest', 'TOOL_VERSION',
    'handle_error', 'exit_code_for', 'EXIT_OK', 'EXIT_CONFIG_ERROR', 'EXIT_RUNTIME_ERROR',
]
