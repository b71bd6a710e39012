"""
Command-line entry point for the Universal Detector Lab
"""
import logging
import sys

import click
import structlog

from app import __version__
from app.cli import estimate, scan, validate
from app.config import settings
from app.exceptions import DetectorError


def configure_logging(level: str = settings.log_level, fmt: str = settings.log_format) -> None:
    """Route structlog through stdlib logging on stderr so stdout stays clean"""
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level.upper(), force=True)
    renderer = structlog.processors.JSONRenderer() if fmt == "json" else structlog.dev.ConsoleRenderer(colors=False)
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


logger = structlog.get_logger()


class DetectorCLI(click.Group):
    """Group that turns library errors into a message and an exit code"""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except DetectorError as exc:
            logger.error("Command failed", error=type(exc).__name__, detail=exc.detail, **exc.context)
            if settings.debug:
                raise
            click.echo(f"Error: {exc.detail}", err=True)
            ctx.exit(exc.exit_code)


@click.group(cls=DetectorCLI)
@click.version_option(__version__, prog_name=settings.app_name)
@click.option("--log-level", default=None, help="Override UDL_LOG_LEVEL")
@click.option("--log-format", type=click.Choice(["console", "json"]), default=None, help="Override UDL_LOG_FORMAT")
def cli(log_level, log_format):
    """Universal quantum detectors: validate, estimate, scan"""
    configure_logging(log_level or settings.log_level, log_format or settings.log_format)


cli.add_command(validate)
cli.add_command(estimate)
cli.add_command(scan)


if __name__ == "__main__":
    cli()
