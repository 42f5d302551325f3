#!/usr/bin/env python3
"""
qmcltl - approximate LTL model checking of quantum Markov chains

This script provides the command-line interface. A model file names a channel,
an optional initial state, the atomic propositions and a formula; the `check`
command decides whether the trajectory epsilon-approximately satisfies it.

Exit codes: 0 true, 1 false, 2 unknown, 3 not periodically stable,
4 input or other errors.
"""

import os
import sys
import logging
from typing import Any, Dict, Optional

import click
from dotenv import load_dotenv

# Add the current directory to the Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.output_formatter import FORMATS, format_for_display, save_results_to_file
from src.workflow import run_check, run_spectral, run_trace

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

# Load environment variables
load_dotenv()

EXIT_CODES = {"true": 0, "false": 1, "unknown": 2}
EXIT_UNSTABLE = 3
EXIT_ERROR = 4


def exit_code(result: Dict[str, Any]) -> int:
    """Map a result dictionary to the process exit code."""
    if "error" in result:
        return EXIT_UNSTABLE if result.get("error_type") == "unstable" else EXIT_ERROR
    if result.get("command") == "check":
        return EXIT_CODES[result["verdict"]]
    if result.get("command") == "spectral" and not result.get("stable", True):
        return EXIT_UNSTABLE
    return 0


def _emit(result: Dict[str, Any], format_type: str, output_file: Optional[str]) -> None:
    if output_file:
        if save_results_to_file(result, output_file, format_type):
            click.echo(f"Output saved to {output_file}")
        else:
            click.echo("Error saving output to file", err=True)
            sys.exit(EXIT_ERROR)
    else:
        click.echo(format_for_display(result, format_type))
    sys.exit(exit_code(result))


def _format(json_flag: bool, format_type: str) -> str:
    return "json" if json_flag else format_type


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Log numeric diagnostics (DEBUG level)')
def cli(verbose: bool):
    """Approximate LTL model checking of quantum Markov chains."""
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)
        logger.debug("Verbose logging enabled")


@cli.command()
@click.argument('model_path', type=click.Path())
@click.option('--epsilon', type=float, default=0.5, show_default=True, help='Initial neighborhood radius')
@click.option('--max-halvings', type=int, default=10, show_default=True, help='Maximum number of epsilon halvings')
@click.option('--tolerance-file', help='JSON file overriding numeric tolerances')
@click.option('--qmax', type=int, default=None, help='Denominator cap for rational angles (default d^2)')
@click.option('--json', 'json_flag', is_flag=True, help='Emit the report as JSON')
@click.option('--format', '-fmt', 'format_type', type=click.Choice(FORMATS), default='text', help='Output format')
@click.option('--output_file', '-o', help='Path to output file')
@click.option('--export-automata', 'export_dir', help='Directory to write the automata in HOA format')
def check(model_path: str, epsilon: float, max_halvings: int, tolerance_file: Optional[str],
          qmax: Optional[int], json_flag: bool, format_type: str, output_file: Optional[str],
          export_dir: Optional[str]):
    """Check the model's formula with epsilon halving."""
    result = run_check(model_path, epsilon=epsilon, max_halvings=max_halvings,
                       tolerance_file=tolerance_file, qmax=qmax, export_dir=export_dir)
    _emit(result, _format(json_flag, format_type), output_file)


@cli.command()
@click.argument('model_path', type=click.Path())
@click.option('--epsilon', type=float, default=0.5, show_default=True, help='Radius for the reported horizon')
@click.option('--tolerance-file', help='JSON file overriding numeric tolerances')
@click.option('--qmax', type=int, default=None, help='Denominator cap for rational angles (default d^2)')
@click.option('--json', 'json_flag', is_flag=True, help='Emit the report as JSON')
@click.option('--format', '-fmt', 'format_type', type=click.Choice(FORMATS), default='text', help='Output format')
@click.option('--output_file', '-o', help='Path to output file')
def spectral(model_path: str, epsilon: float, tolerance_file: Optional[str], qmax: Optional[int],
             json_flag: bool, format_type: str, output_file: Optional[str]):
    """Print eigenvalues, peripheral angles, period, decay constants and horizon."""
    result = run_spectral(model_path, epsilon=epsilon, tolerance_file=tolerance_file, qmax=qmax)
    _emit(result, _format(json_flag, format_type), output_file)


@cli.command()
@click.argument('model_path', type=click.Path())
@click.option('--steps', '-n', type=click.IntRange(min=0), default=10, show_default=True,
              help='Last step to print')
@click.option('--tolerance-file', help='JSON file overriding numeric tolerances')
@click.option('--json', 'json_flag', is_flag=True, help='Emit the trajectory as JSON')
@click.option('--format', '-fmt', 'format_type', type=click.Choice(FORMATS), default='text', help='Output format')
@click.option('--output_file', '-o', help='Path to output file')
def trace(model_path: str, steps: int, tolerance_file: Optional[str], json_flag: bool,
          format_type: str, output_file: Optional[str]):
    """Print the labelled trajectory for n = 0..steps."""
    result = run_trace(model_path, steps=steps, tolerance_file=tolerance_file)
    _emit(result, _format(json_flag, format_type), output_file)


if __name__ == '__main__':
    cli()
