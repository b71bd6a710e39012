"""
estimate and scan: Monte Carlo runs driven by the experiment config
"""
import click
import structlog

from app.cli.common import common_options, load_config, prepare_experiment, resolve_observable, resolve_state
from app.config import settings
from app.exceptions import ConfigError
from app.schemas.report import EstimationReport
from app.services.estimation_service import EstimationService
from app.services.report_service import ReportService

logger = structlog.get_logger(__name__)


def _format_report(report: EstimationReport) -> str:
    line = (
        f"{report.detector}  {report.observable}  n={report.n}  "
        f"estimate = {report.estimate_re:.6f}{report.estimate_im:+.6f}i ± {report.stderr:.6f}"
    )
    if report.exact is not None:
        line += f"  exact = {report.exact_re:.6f}{report.exact_im:+.6f}i"
    if report.wall_s is not None:
        line += f"  ({report.wall_s:.2f} s)"
    return line


def _setup(config):
    experiment = prepare_experiment(config)
    dim = experiment.dim
    state, _ = resolve_state(config.state, dim, config.seed)
    observable, observable_label = resolve_observable(config.observable, dim, config.seed)
    detector = experiment.registry.build_detector(config.detector, experiment.ancilla)
    service = EstimationService(workers=settings.workers if config.workers is None else config.workers)
    return experiment, detector, state, observable, observable_label, service


@click.command("estimate")
@common_options
def estimate(config_path, out, seed, n, detector, fmt):
    """Estimate Tr[ρO] from sampled detector outcomes"""
    config = load_config(config_path, out=out, seed=seed, n=n, detector=detector, format=fmt)
    if config.n is None:
        raise ConfigError("A sample count is required (config field 'n' or --n)", field="n")

    experiment, built, state, observable, label, service = _setup(config)
    report = service.estimate(built, state, observable, config.n, config.seed, observable_label=label)

    click.echo(_format_report(report))
    ReportService().write_reports(experiment.out_dir, "estimate", [report], config.format)


@click.command("scan")
@common_options
@click.option("--schedule", type=str, default=None, help="Comma-separated increasing sample counts")
def scan(config_path, out, seed, n, detector, fmt, schedule):
    """Convergence scan of the estimate over a schedule of sample counts"""
    parsed = None
    if schedule is not None:
        try:
            parsed = [int(part) for part in schedule.split(",") if part.strip()]
        except ValueError as exc:
            raise ConfigError(f"Invalid --schedule '{schedule}'", field="schedule") from exc
    config = load_config(config_path, out=out, seed=seed, n=n, detector=detector, format=fmt, schedule=parsed)
    if config.schedule is None:
        raise ConfigError("A schedule is required (config field 'schedule' or --schedule)", field="schedule")

    experiment, built, state, observable, label, service = _setup(config)
    reports = service.convergence_scan(built, state, observable, config.schedule, config.seed, observable_label=label)

    for report in reports:
        click.echo(_format_report(report))
    click.echo(ReportService.loglog_summary(reports))
    ReportService().write_reports(experiment.out_dir, "scan", reports, config.format)
