"""
Workflow Orchestrator Module

This module orchestrates the commands: it loads a model, resolves tolerances,
routes the model to the checker, the spectral analysis or the trajectory
printer, and returns plain result dictionaries for the output formatter.
"""

import os
import sys
import logging
from typing import Dict, Any, List, Optional, Tuple

from dotenv import load_dotenv

# Add the parent directory to sys.path to allow imports when run directly
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.automata import to_hoa
from src.checker import check_with_refinement
from src.config import CheckConfig, Tolerances, resolve_tolerances
from src.errors import QmcLtlError, NotPeriodicallyStableError, AmbiguityLimitError
from src.model_loader import Model, load_model
from src.props import ObservableProp, TraceProp, expectation, letter_names
from src.spectral import analyze
from src.superop import choi_lift, superop_trajectory_traces, trajectory

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

# Load environment variables
load_dotenv()

LOG_FILE_ENV_VAR = "QMC_LTL_LOG_FILE"


def configure_file_logging() -> Optional[str]:
    """Attach a FileHandler to the root logger when QMC_LTL_LOG_FILE is set."""
    log_file = os.getenv(LOG_FILE_ENV_VAR)
    if not log_file:
        return None
    root = logging.getLogger()
    target = os.path.abspath(log_file)
    if any(isinstance(h, logging.FileHandler) and h.baseFilename == target for h in root.handlers):
        return log_file
    handler = logging.FileHandler(log_file)
    handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
    root.addHandler(handler)
    logger.info(f"Logging to {log_file}")
    return log_file


def error_result(e: QmcLtlError, command: str) -> Dict[str, Any]:
    """Result dictionary for a failed command."""
    result = {"command": command, "error": str(e), "error_type": e.error_type}
    if isinstance(e, NotPeriodicallyStableError):
        result["offending"] = [[z.real, z.imag] for z in e.offending]
    if isinstance(e, AmbiguityLimitError):
        result["ambiguous"] = list(e.names)
    return result


def _load(model_path: str, tolerance_file: Optional[str]) -> Tuple[Model, Tolerances]:
    tol = resolve_tolerances(tolerance_file)
    return load_model(model_path, tol), tol


def export_automata(automata: Dict[str, Any], export_dir: str, model_name: str) -> List[str]:
    """
    Write the automata of the last check in HOA format.

    Args:
        automata: Mapping of role (neighborhood, formula, negation) to NBA
        export_dir: Directory to write into; created when missing
        model_name: Prefix of the file names

    Returns:
        Paths of the written files
    """
    os.makedirs(export_dir, exist_ok=True)
    written = []
    for role in ("neighborhood", "formula", "negation"):
        if role not in automata:
            continue
        path = os.path.join(export_dir, f"{model_name}-{role}.hoa")
        with open(path, 'w', encoding='utf-8') as f:
            f.write(to_hoa(automata[role], name=f"{model_name} {role}"))
        written.append(path)
    logger.info(f"Exported {len(written)} automata to {export_dir}")
    return written


def run_check(
    model_path: str,
    epsilon: float = 0.5,
    max_halvings: int = 10,
    tolerance_file: Optional[str] = None,
    qmax: Optional[int] = None,
    export_dir: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Check a model's formula with epsilon halving.

    Args:
        model_path: Path to the model JSON file
        epsilon: Initial neighborhood radius
        max_halvings: Maximum number of halvings after the first run
        tolerance_file: Optional tolerance override file
        qmax: Denominator cap for rational angles
        export_dir: When given, the automata of the last run are written here

    Returns:
        Result dictionary with the final verdict and one report per epsilon,
        or an "error" entry
    """
    configure_file_logging()
    try:
        model, tol = _load(model_path, tolerance_file)
        cfg = CheckConfig(epsilon0=epsilon, max_halvings=max_halvings, qmax=qmax, tolerances=tol)
        logger.info(f"Checking '{model.formula_text}' on {model.name} ({model.semantics} semantics)")

        sink = {} if export_dir else None
        verdict, reports = check_with_refinement(model.qmc, model.props, model.formula, cfg, sink)
        result = {
            "command": "check",
            "model": model.name,
            "source": model.source,
            "formula": model.formula_text,
            "semantics": model.semantics,
            "verdict": verdict.value,
            "reports": [r.to_dict() for r in reports],
        }
        if export_dir:
            result["exported"] = export_automata(sink, export_dir, model.name)
        return result
    except QmcLtlError as e:
        logger.error(f"Check failed: {str(e)}")
        return error_result(e, "check")
    except Exception as e:
        logger.error(f"Unexpected error: {str(e)}")
        return {"command": "check", "error": f"Unexpected error: {str(e)}", "error_type": "internal"}


def run_spectral(
    model_path: str,
    epsilon: float = 0.5,
    tolerance_file: Optional[str] = None,
    qmax: Optional[int] = None,
) -> Dict[str, Any]:
    """
    Report the spectral quantities of a model's channel.

    Under state semantics stability is judged from the initial state; under
    super-operator semantics every peripheral eigenvalue counts.
    """
    configure_file_logging()
    try:
        model, tol = _load(model_path, tolerance_file)
        analysis = analyze(model.qmc, qmax, tol)
        result = {
            "command": "spectral",
            "model": model.name,
            "source": model.source,
            "semantics": model.semantics,
            "dimension": model.qmc.dim,
            "epsilon": epsilon,
            **analysis.to_dict(),
        }
        if analysis.stability.stable:
            result["horizon"] = analysis.horizon(epsilon, tol)
        return result
    except QmcLtlError as e:
        logger.error(f"Spectral analysis failed: {str(e)}")
        return error_result(e, "spectral")
    except Exception as e:
        logger.error(f"Unexpected error: {str(e)}")
        return {"command": "spectral", "error": f"Unexpected error: {str(e)}", "error_type": "internal"}


def _letter_bits(values: List[float], props) -> int:
    letter = 0
    for i, (prop, value) in enumerate(zip(props, values)):
        if prop.window.contains(value):
            letter |= 1 << i
    return letter


def run_trace(model_path: str, steps: int = 10, tolerance_file: Optional[str] = None) -> Dict[str, Any]:
    """
    Print the labelled trajectory for n = 0..steps.

    Under super-operator semantics a trace proposition reads tr(M_E^n), so
    step 0 reports d^2 of the original space; observable propositions read
    the Choi trajectory.
    """
    configure_file_logging()
    try:
        model, tol = _load(model_path, tolerance_file)
        names = list(model.prop_names)
        if model.semantics == "state":
            states = trajectory(model.qmc, steps, tol)
            columns = [[expectation(p, rho, tol) for rho in states] for p in model.props]
        else:
            traces = superop_trajectory_traces(model.qmc.superop, steps)
            needs_choi = any(isinstance(p, ObservableProp) for p in model.props)
            choi_states = trajectory(choi_lift(model.qmc), steps, tol) if needs_choi else []
            columns = []
            for p in model.props:
                if isinstance(p, TraceProp):
                    columns.append(traces)
                else:
                    columns.append([expectation(p, rho, tol) for rho in choi_states])

        rows = []
        for n in range(steps + 1):
            values = [col[n] for col in columns]
            letter = _letter_bits(values, model.props)
            rows.append({
                "step": n,
                "letter": list(letter_names(letter, names)),
                "values": dict(zip(names, values)),
            })
        return {
            "command": "trace",
            "model": model.name,
            "source": model.source,
            "semantics": model.semantics,
            "propositions": names,
            "rows": rows,
        }
    except QmcLtlError as e:
        logger.error(f"Trace failed: {str(e)}")
        return error_result(e, "trace")
    except Exception as e:
        logger.error(f"Unexpected error: {str(e)}")
        return {"command": "trace", "error": f"Unexpected error: {str(e)}", "error_type": "internal"}
