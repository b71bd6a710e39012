"""
validate: POVM validity, universality rank and the exact expectation identity
"""
from typing import List

import click
import numpy as np
import structlog

from app.cli.common import common_options, load_config, prepare_experiment
from app.schemas.detector import DetectorRecord
from app.schemas.report import CheckResult, ValidationReport
from app.services.operator_algebra import random_density, random_operator
from app.services.povm_service import PovmService
from app.services.report_service import ReportService

logger = structlog.get_logger(__name__)

IDENTITY_TOLERANCE = 1e-8


def identity_check(detector, dim: int, pairs: int, seed: int) -> CheckResult:
    """max |Σ_i f_i p_i − Tr[ρO]| over random full-rank ρ and complex O"""
    seeds = np.random.SeedSequence(seed).generate_state(2 * pairs)
    povms = PovmService()
    worst = 0.0
    for i in range(pairs):
        state = random_density(dim, dim, int(seeds[2 * i]))
        observable = random_operator(dim, seed=int(seeds[2 * i + 1]))
        value = povms.exact_expectation(detector, state, observable)
        direct = complex(np.trace(state.matrix @ observable.entries))
        worst = max(worst, abs(value - direct))
    return CheckResult(
        name="identity",
        passed=worst < IDENTITY_TOLERANCE,
        details={"pairs": pairs, "max_error": worst, "tolerance": IDENTITY_TOLERANCE},
    )


def run_validation(experiment) -> ValidationReport:
    config = experiment.config
    provider, spec = experiment.provider, experiment.spec
    checks: List[CheckResult] = []

    validation = provider.validate_povm(spec)
    checks.append(
        CheckResult(
            name="povm",
            passed=validation.passed,
            details={
                "outcomes": validation.outcomes,
                "max_negative_eigenvalue": validation.max_negative_eigenvalue,
                "completeness_defect": validation.completeness_defect,
                "trace_defect": validation.trace_defect,
                "tolerance": validation.tolerance,
            },
        )
    )

    report = provider.universality(spec, experiment.ancilla)
    checks.append(
        CheckResult(
            name="universality",
            passed=report.spans,
            details={
                "rank": report.rank,
                "dimension": report.dimension,
                "least_singular_value": report.least_singular_value,
            },
        )
    )

    record = None
    if report.spans:
        detector = provider.build(spec, experiment.ancilla)
        record = DetectorRecord.from_detector(detector)
        checks.append(identity_check(detector, experiment.dim, config.validation_pairs, config.seed))
    else:
        checks.append(CheckResult(name="identity", passed=False, details={"skipped": "detector is not universal"}))

    return ValidationReport(detector=config.detector, d=experiment.dim, checks=checks, record=record)


@click.command("validate")
@common_options
def validate(config_path, out, seed, n, detector, fmt):
    """Run POVM, universality and identity checks; exit 1 if any fails"""
    config = load_config(config_path, out=out, seed=seed, n=n, detector=detector, format=fmt)
    experiment = prepare_experiment(config)
    report = run_validation(experiment)

    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        summary = ", ".join(f"{key}={value}" for key, value in check.details.items())
        click.echo(f"{status}  {check.name:<13} {summary}")

    ReportService().write_json(experiment.out_dir / "validation.json", report)
    if not report.passed:
        logger.warning("Validation failed", detector=config.detector)
        click.get_current_context().exit(1)
