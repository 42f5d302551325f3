"""
Output Formatter Module

This module renders the result dictionaries of the check, spectral and trace
commands as text, markdown or JSON, and saves them to files.
"""

import os
import json
import logging
from typing import Dict, Any, List, Optional, Sequence

logger = logging.getLogger(__name__)

FORMATS = ("text", "markdown", "json")


def format_complex(z: Sequence[float], digits: int = 6) -> str:
    """Render a [re, im] pair; purely real values drop the imaginary part."""
    re, im = z
    if abs(im) < 10 ** -digits:
        return f"{re:.{digits}g}"
    sign = "+" if im >= 0 else "-"
    return f"{re:.{digits}g}{sign}{abs(im):.{digits}g}i"


def _letters(names: Sequence[str], letter: int) -> str:
    return "{" + ", ".join(n for i, n in enumerate(names) if letter >> i & 1) + "}"


def _letter_set(names: Sequence[str], letters: Sequence[int]) -> str:
    return "{" + " ".join(_letters(names, letter) for letter in letters) + "}"


def format_witness(witness: Optional[Dict[str, Any]], names: Sequence[str]) -> str:
    """Render a lasso witness as prefix (cycle)^w with named letters."""
    if not witness:
        return "none"
    prefix = " ".join(_letters(names, letter) for letter in witness["prefixLetters"])
    cycle = " ".join(_letters(names, letter) for letter in witness["cycleLetters"])
    return f"{prefix} ({cycle})^w" if prefix else f"({cycle})^w"


def _check_lines(result: Dict[str, Any], heading: str, bullet: str) -> List[str]:
    lines = [
        f"{heading}Model: {result['model']}",
        f"{bullet}Formula: {result['formula']}",
        f"{bullet}Semantics: {result['semantics']}",
        f"{bullet}Verdict: {result['verdict'].upper()}",
        "",
    ]
    for report in result["reports"]:
        lines.append(
            f"{bullet}epsilon={report['epsilon']:g}: {report['verdict']} "
            f"(period {report['period']}, horizon {report['horizon']})"
        )
        if report["ambiguous"]:
            lines.append(f"    ambiguous: {', '.join(report['ambiguous'])}")
    final = result["reports"][-1] if result["reports"] else None
    if final is not None:
        names = final["propositions"]
        lines.append("")
        lines.append(f"{bullet}Cycle letter sets: "
                     + " ".join(_letter_set(names, s) for s in final["cycleLetterSets"]))
        if result["verdict"] == "false":
            lines.append(f"{bullet}Violating word: {format_witness(final['violatingWitness'], names)}")
        elif result["verdict"] == "true":
            lines.append(f"{bullet}Satisfying word: {format_witness(final['satisfyingWitness'], names)}")
        else:
            lines.append(f"{bullet}Satisfying word: {format_witness(final['satisfyingWitness'], names)}")
            lines.append(f"{bullet}Violating word: {format_witness(final['violatingWitness'], names)}")
    if result.get("exported"):
        lines.append(f"{bullet}Exported automata: {', '.join(result['exported'])}")
    return lines


def _spectral_lines(result: Dict[str, Any], heading: str, bullet: str) -> List[str]:
    lines = [
        f"{heading}Model: {result['model']}",
        f"{bullet}Dimension: {result['dimension']}",
        f"{bullet}Eigenvalues: " + ", ".join(format_complex(z) for z in result["eigenvalues"]),
        f"{bullet}Peripheral spectrum (qmax={result['qmax']}):",
    ]
    for entry in result["peripheral"]:
        angle = entry["angle"] if entry["angle"] is not None else "irrational"
        lines.append(f"    {format_complex(entry['eigenvalue'])}  angle {angle}  x{entry['multiplicity']}")
    lines.append(f"{bullet}mu: {result['mu']:.6g}, d_mu: {result['d_mu']}, C: {result['C']:.6g}")
    if result["stable"]:
        lines.append(f"{bullet}Period: {result['period']}")
        lines.append(f"{bullet}Horizon at epsilon={result['epsilon']:g}: {result['horizon']}")
    else:
        lines.append(f"{bullet}Not periodically stable; offending: "
                     + ", ".join(format_complex(z) for z in result["offending"]))
    return lines


def _trace_lines(result: Dict[str, Any], markdown: bool) -> List[str]:
    names = result["propositions"]
    if markdown:
        lines = [f"# Trajectory of {result['model']}", "",
                 "| n | letter | " + " | ".join(names) + " |",
                 "|---|---|" + "---|" * len(names)]
        for row in result["rows"]:
            values = " | ".join(f"{row['values'][n]:.6g}" for n in names)
            lines.append(f"| {row['step']} | {{{', '.join(row['letter'])}}} | {values} |")
        return lines
    lines = [f"Trajectory of {result['model']} ({result['semantics']} semantics)"]
    for row in result["rows"]:
        values = "  ".join(f"{n}={row['values'][n]:.6g}" for n in names)
        lines.append(f"n={row['step']:<4} {{{', '.join(row['letter'])}}}  {values}")
    return lines


def format_for_display(response: Dict[str, Any], format_type: str = "text") -> str:
    """
    Format a command result for display in the specified format.

    Args:
        response: Result dictionary from the workflow module
        format_type: The format to use (text, markdown, json)

    Returns:
        The formatted output as a string
    """
    if not response:
        return "No result available."

    if format_type == "json":
        return json.dumps(response, indent=2)

    if "error" in response:
        return f"Error ({response.get('error_type', 'internal')}): {response['error']}"

    markdown = format_type == "markdown"
    heading, bullet = ("# ", "- ") if markdown else ("", "")
    command = response.get("command")
    if command == "check":
        lines = _check_lines(response, heading, bullet)
    elif command == "spectral":
        lines = _spectral_lines(response, heading, bullet)
    elif command == "trace":
        lines = _trace_lines(response, markdown)
    else:
        logger.warning(f"Unknown result kind: {command}")
        return json.dumps(response, indent=2)

    logger.debug(f"Output formatted for display ({format_type})")
    return "\n".join(lines)


def save_results_to_file(response: Dict[str, Any], output_file: str,
                         format_type: str = "text") -> bool:
    """
    Save the results to a file.

    Args:
        response: Result dictionary from the workflow module
        output_file: The file path to write the results to
        format_type: The format to use (text, markdown, json)

    Returns:
        True if successful, False otherwise
    """
    try:
        # Create directory if it doesn't exist
        os.makedirs(os.path.dirname(os.path.abspath(output_file)), exist_ok=True)

        if format_type == "json":
            with open(output_file, 'w', encoding='utf-8') as f:
                json.dump(response, f, indent=2)
        else:
            formatted = format_for_display(response, format_type)
            with open(output_file, 'w', encoding='utf-8') as f:
                f.write(formatted + "\n")

        logger.info(f"Results saved to {output_file}")
        return True
    except OSError as e:
        logger.error(f"Error saving results to file: {str(e)}")
        return False
