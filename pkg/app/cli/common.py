"""
Shared CLI plumbing: config loading, flag overrides, state/observable specs
"""
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import click
import numpy as np
import orjson
import structlog
from pydantic import ValidationError

from app.config import settings
from app.exceptions import ConfigError, DetectorError
from app.models.groups import SpinSystem
from app.models.operator import Operator, State
from app.schemas.experiment import ExperimentConfig
from app.schemas.operator import OperatorRecord
from app.services.detector_registry import DetectorProvider, DetectorRegistry, DetectorSpec
from app.services.operator_algebra import random_density, random_operator
from app.services.weyl_service import weyl_unitary

logger = structlog.get_logger(__name__)

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def common_options(function):
    """Flags shared by every subcommand; each overrides its config field"""
    options = [
        click.option("--config", "config_path", type=str, default=None, help="Experiment JSON file, or - for stdin"),
        click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory"),
        click.option("--seed", type=int, default=None, help="Master seed (required)"),
        click.option("--n", "n", type=int, default=None, help="Sample count"),
        click.option("--detector", type=str, default=None, help="Detector id, e.g. weyl:d=3"),
        click.option("--format", "fmt", type=click.Choice(["json", "csv", "both"]), default=None),
    ]
    for option in reversed(options):
        function = option(function)
    return function


def _read_document(config_path: Optional[str]) -> Dict[str, Any]:
    if config_path is None:
        return {}
    try:
        if config_path == "-":
            raw = click.get_text_stream("stdin").read()
        else:
            raw = Path(config_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"Cannot read config '{config_path}': {exc.strerror}", path=config_path) from exc

    try:
        document = orjson.loads(raw)
    except orjson.JSONDecodeError as exc:
        raise ConfigError(
            f"Invalid JSON in config at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            line=exc.lineno,
            column=exc.colno,
        ) from exc
    if not isinstance(document, dict):
        raise ConfigError("Config must be a JSON object")
    return document


def load_config(config_path: Optional[str], **overrides: Any) -> ExperimentConfig:
    """Parse the config document and apply non-empty flag overrides"""
    document = _read_document(config_path)
    document.update({key: value for key, value in overrides.items() if value is not None})
    try:
        config = ExperimentConfig.model_validate(document)
    except ValidationError as exc:
        problems = [
            f"{'.'.join(str(part) for part in error['loc']) or '<root>'}: {error['msg']}" for error in exc.errors()
        ]
        raise ConfigError("Invalid config: " + "; ".join(problems), problems=problems) from exc

    if config.seed is None:
        raise ConfigError("A seed is required (config field 'seed' or --seed)", field="seed")
    return config


def _spec_tokens(spec: str) -> Tuple[str, str]:
    head, _, rest = spec.partition(":")
    return head.strip().lower(), rest.strip()


def _key_values(rest: str, field: str) -> Dict[str, str]:
    values = {}
    for token in filter(None, (part.strip() for part in rest.replace(",", ":").split(":"))):
        key, sep, value = token.partition("=")
        if not sep:
            raise ConfigError(f"Expected key=value in {field} spec, got '{token}'", field=field)
        values[key.strip().lower()] = value.strip()
    return values


def _int(value: str, field: str) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise ConfigError(f"Expected an integer in {field} spec, got '{value}'", field=field) from exc


def _from_record(record: OperatorRecord, dim: int, field: str) -> Operator:
    op = record.to_operator()
    if op.dims != (dim, dim):
        raise ConfigError(f"{field} has dims {op.dims}, expected {(dim, dim)}", field=field)
    return op


def resolve_state(spec: Union[str, OperatorRecord, None], dim: int, seed: int) -> Tuple[State, str]:
    """ρ from "random:rank=r[:seed=s]", "basis:k", "mixed" or an operator record"""
    if spec is None:
        raise ConfigError("A state is required for this command", field="state")
    if isinstance(spec, OperatorRecord):
        try:
            return State(_from_record(spec, dim, "state")), "custom"
        except DetectorError as exc:
            raise ConfigError(f"state: {exc.detail}", field="state") from exc

    kind, rest = _spec_tokens(spec)
    if kind == "mixed":
        return State.maximally_mixed(dim), spec
    if kind == "basis":
        k = _int(rest, "state")
        if not 0 <= k < dim:
            raise ConfigError(f"Basis index {k} outside [0, {dim})", field="state")
        return State(Operator.basis_projector(dim, k)), spec
    if kind == "random":
        values = _key_values(rest, "state")
        rank = _int(values.get("rank", "1"), "state")
        state_seed = _int(values["seed"], "state") if "seed" in values else seed
        if not 1 <= rank <= dim:
            raise ConfigError(f"State rank {rank} outside [1, {dim}]", field="state")
        return random_density(dim, rank, state_seed), spec
    raise ConfigError(f"Unknown state spec '{spec}'", field="state")


def resolve_observable(spec: Union[str, OperatorRecord, None], dim: int, seed: int) -> Tuple[Operator, str]:
    """O from a named spec or an operator record"""
    if spec is None:
        raise ConfigError("An observable is required for this command", field="observable")
    if isinstance(spec, OperatorRecord):
        return _from_record(spec, dim, "observable"), "custom"

    kind, rest = _spec_tokens(spec)
    if kind == "identity":
        return Operator.identity(dim), spec
    if kind == "weyl":
        parts = [p for p in rest.split(",") if p.strip()]
        if len(parts) != 2:
            raise ConfigError(f"Expected 'weyl:p,q', got '{spec}'", field="observable")
        p, q = (_int(part.strip(), "observable") for part in parts)
        if not (0 <= p < dim and 0 <= q < dim):
            raise ConfigError(f"Weyl indices ({p},{q}) outside [0,{dim})", field="observable")
        return weyl_unitary(dim, p, q), spec
    if kind == "pauli":
        name = rest.lower()
        if dim != 2 or name not in PAULI:
            raise ConfigError(f"Pauli observables need d = 2 and one of X, Y, Z; got '{spec}'", field="observable")
        return Operator(PAULI[name]), spec
    if kind == "projector":
        k = _int(rest, "observable")
        if not 0 <= k < dim:
            raise ConfigError(f"Projector index {k} outside [0, {dim})", field="observable")
        return Operator.basis_projector(dim, k), spec
    if kind == "spin":
        sys = SpinSystem.of(Fraction(dim - 1, 2))
        component = {"x": sys.jx, "y": sys.jy, "z": sys.jz}.get(rest.lower())
        if component is None:
            raise ConfigError(f"Expected 'spin:x|y|z', got '{spec}'", field="observable")
        return component, spec
    if kind == "random":
        values = _key_values(rest, "observable")
        observable_seed = _int(values["seed"], "observable") if "seed" in values else seed
        return random_operator(dim, seed=observable_seed, hermitian=True), spec
    raise ConfigError(f"Unknown observable spec '{spec}'", field="observable")


@dataclass
class Experiment:
    """Resolved config plus the detector provider it addresses"""

    config: ExperimentConfig
    registry: DetectorRegistry
    spec: DetectorSpec
    provider: DetectorProvider
    ancilla: State

    @property
    def dim(self) -> int:
        return self.provider.system_dimension(self.spec)

    @property
    def out_dir(self) -> Path:
        return Path(self.config.out or settings.output_dir)


def prepare_experiment(config: ExperimentConfig) -> Experiment:
    grid = tuple(config.grid) if config.grid else None
    registry = DetectorRegistry(grid_shape=grid)
    spec, provider = registry.resolve(config.detector)

    if config.ancilla == "auto":
        ancilla = provider.default_ancilla(spec)
    else:
        expected = provider.ancilla_dimension(spec)
        try:
            ancilla = State(config.ancilla.to_operator())
        except DetectorError as exc:
            raise ConfigError(f"ancilla: {exc.detail}", field="ancilla") from exc
        if ancilla.dim != expected:
            raise ConfigError(f"ancilla has dimension {ancilla.dim}, expected {expected}", field="ancilla")

    logger.info("Prepared experiment", detector=config.detector, seed=config.seed)
    return Experiment(config=config, registry=registry, spec=spec, provider=provider, ancilla=ancilla)
