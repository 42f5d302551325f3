"""
Model Loader Module

This module reads model files: JSON documents describing a channel by its
Kraus operators (or a classical transition matrix), an optional initial
state, the atomic propositions and the formula to check.
"""

import os
import json
import logging
import re
from dataclasses import dataclass
from typing import Dict, Any, List, Optional, Tuple

import numpy as np

from src.config import Tolerances, DEFAULT_TOLERANCES
from src.errors import InputError, QmcLtlError, UnknownPropositionError
from src.ltl import Formula, NextPow, atoms, parse
from src.props import AtomicProp, ObservableProp, TraceProp, Window
from src.superop import QMC, DensityOperator, SuperOperator, embed_classical_mc

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SEMANTICS = ("state", "superoperator")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_RESERVED = {"X", "F", "G", "U", "true", "false"}


@dataclass(frozen=True)
class Model:
    """A complete problem instance."""

    name: str
    qmc: QMC
    semantics: str
    props: Tuple[AtomicProp, ...]
    formula: Formula
    formula_text: str
    source: Optional[str] = None

    @property
    def prop_names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.props)


def parse_complex_matrix(data: Any, what: str) -> np.ndarray:
    """
    Parse a nested row-major matrix whose entries are numbers or [re, im] pairs.

    Args:
        data: List of rows
        what: Description used in error messages

    Returns:
        complex128 array
    """
    if not isinstance(data, list) or not data or not all(isinstance(row, list) for row in data):
        raise InputError(f"{what} must be a nonempty list of rows")
    width = len(data[0])
    rows = []
    for r, row in enumerate(data):
        if len(row) != width:
            raise InputError(f"{what} has ragged rows (row {r} has {len(row)} entries, expected {width})")
        parsed = []
        for c, entry in enumerate(row):
            if isinstance(entry, bool):
                raise InputError(f"{what}[{r}][{c}] must be a number or [re, im] pair")
            if isinstance(entry, (int, float)):
                parsed.append(complex(entry, 0.0))
            elif (isinstance(entry, list) and len(entry) == 2
                  and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)):
                parsed.append(complex(entry[0], entry[1]))
            else:
                raise InputError(f"{what}[{r}][{c}] must be a number or [re, im] pair, got {entry!r}")
        rows.append(parsed)
    return np.array(rows, dtype=np.complex128)


def _require_shape(m: np.ndarray, d: int, what: str) -> None:
    if m.shape != (d, d):
        raise InputError(f"{what} must be {d}x{d}, got {m.shape[0]}x{m.shape[1]}")


def _parse_channel(data: Dict[str, Any], d: int, tol: Tolerances) -> Tuple[SuperOperator, Optional[DensityOperator]]:
    if "classicalChain" in data:
        chain = data["classicalChain"]
        if not isinstance(chain, dict):
            raise InputError("'classicalChain' must be an object with transitions and initialDistribution")
        try:
            P = np.asarray(chain.get("transitions"), dtype=float)
            mu0 = np.asarray(chain.get("initialDistribution"), dtype=float)
        except (TypeError, ValueError) as e:
            raise InputError(f"classicalChain entries must be real numbers: {str(e)}")
        if P.shape != (d, d):
            raise InputError(f"classicalChain.transitions must be {d}x{d}")
        g = embed_classical_mc(P, mu0, tol)
        return g.superop, g.initial

    kraus = data.get("kraus")
    if not isinstance(kraus, list) or not kraus:
        raise InputError("Model needs a nonempty 'kraus' list or a 'classicalChain'")
    ops = []
    for k, entry in enumerate(kraus):
        m = parse_complex_matrix(entry, f"kraus[{k}]")
        _require_shape(m, d, f"kraus[{k}]")
        ops.append(m)
    superop = SuperOperator.from_matrices(ops, tol)

    initial = None
    if data.get("initialState") is not None:
        m = parse_complex_matrix(data["initialState"], "initialState")
        _require_shape(m, d, "initialState")
        initial = DensityOperator.from_matrix(m, tol, allow_projection=False)
    return superop, initial


def _parse_props(items: Any, d: int, semantics: str) -> List[AtomicProp]:
    if not isinstance(items, list):
        raise InputError("'atomicProps' must be a list")
    props: List[AtomicProp] = []
    seen = set()
    for k, item in enumerate(items):
        if not isinstance(item, dict):
            raise InputError(f"atomicProps[{k}] must be an object")
        name = item.get("name")
        if not isinstance(name, str) or not _NAME.match(name) or name in _RESERVED:
            raise InputError(f"atomicProps[{k}] has an invalid name {name!r}")
        if name in seen:
            raise InputError(f"Duplicate proposition name {name}")
        seen.add(name)
        window = Window.from_list(item.get("windows", []))
        kind = item.get("kind", "observable")
        if kind == "trace":
            if semantics != "superoperator":
                raise InputError(f"Trace proposition {name} needs semantics 'superoperator'")
            props.append(TraceProp(name, window))
        elif kind == "observable":
            dim = d if semantics == "state" else d * d
            a = parse_complex_matrix(item.get("observable"), f"observable of {name}")
            _require_shape(a, dim, f"observable of {name}")
            props.append(ObservableProp(name, a, window))
        else:
            raise InputError(f"atomicProps[{k}] has unknown kind {kind!r}")
    return props


def parse_model(data: Dict[str, Any], tol: Tolerances = DEFAULT_TOLERANCES,
                source: Optional[str] = None) -> Model:
    """
    Validate a decoded model document and build the problem instance.

    Args:
        data: Decoded JSON object
        tol: Tolerances for CPTP and state validation
        source: Path the document came from, for messages

    Returns:
        The Model
    """
    if not isinstance(data, dict):
        raise InputError("A model file must contain a JSON object")
    version = data.get("schemaVersion")
    if version != SCHEMA_VERSION:
        raise InputError(f"Unsupported schemaVersion {version!r}; expected {SCHEMA_VERSION}")

    d = data.get("dimension")
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise InputError(f"'dimension' must be a positive integer, got {d!r}")
    semantics = data.get("semantics", "state")
    if semantics not in SEMANTICS:
        raise InputError(f"'semantics' must be one of {SEMANTICS}, got {semantics!r}")

    superop, initial = _parse_channel(data, d, tol)
    if semantics == "state" and initial is None:
        raise InputError("State semantics needs an 'initialState'")
    if semantics == "superoperator":
        if initial is not None:
            logger.warning("Ignoring initialState under super-operator semantics")
        initial = None

    props = _parse_props(data.get("atomicProps", []), d, semantics)

    text = data.get("formula")
    if not isinstance(text, str) or not text.strip():
        raise InputError("'formula' must be a nonempty string")
    formula = parse(text)
    unknown = sorted(atoms(formula) - {p.name for p in props})
    if unknown:
        raise UnknownPropositionError(f"Formula uses undeclared propositions: {', '.join(unknown)}")
    j = data.get("jOffset", 0)
    if isinstance(j, bool) or not isinstance(j, int) or j < 0:
        raise InputError(f"'jOffset' must be a non-negative integer, got {j!r}")
    if j > 0:
        formula = NextPow(j, formula)

    name = data.get("name") or (os.path.splitext(os.path.basename(source))[0] if source else "model")
    return Model(
        name=name,
        qmc=QMC(superop=superop, initial=initial),
        semantics=semantics,
        props=tuple(props),
        formula=formula,
        formula_text=str(formula),
        source=source,
    )


def load_model(model_path: str, tol: Tolerances = DEFAULT_TOLERANCES) -> Model:
    """
    Load a model from a JSON file.

    Args:
        model_path: Path to the model file
        tol: Tolerances for validation

    Returns:
        The parsed Model

    Raises:
        InputError: Missing file, invalid JSON or an invalid model
    """
    if not os.path.exists(model_path):
        logger.error(f"Model file not found: {model_path}")
        raise InputError(f"Model file not found: {model_path}")

    try:
        with open(model_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in model file: {str(e)}")
        raise InputError(f"Invalid JSON in model file {model_path}: {str(e)}")
    except UnicodeDecodeError as e:
        logger.error(f"Model file is not UTF-8: {str(e)}")
        raise InputError(f"Model file {model_path} is not valid UTF-8: {str(e)}")
    except OSError as e:
        logger.error(f"Cannot read model file: {str(e)}")
        raise InputError(f"Cannot read model file {model_path}: {str(e)}")

    try:
        model = parse_model(data, tol, source=model_path)
    except QmcLtlError as e:
        logger.error(f"Invalid model {model_path}: {str(e)}")
        raise

    logger.info(f"Successfully loaded model '{model.name}' from: {model_path}")
    return model
