#!/usr/bin/env python3
"""
TorsionLab CLI - refined torsion experiments on Z2-graded complexes
"""
import click
import json
import sys
from pathlib import Path
from src.errors import TorsionLabError, exit_code_for
from src.lab_runner import LabRunner
from src.report_export import export_pdf
from src.report_store import ReportStore, dumps
from src.run_config import Command, RunConfigManager, configure_logging, run_config_from_dict

DEFAULT_PRESETS = {
    Command.VERIFY: "verify",
    Command.TORSION: "torsion-hand",
    Command.TORUS: "torus-generic",
    Command.DEFORM: "deform-metric",
    Command.DUAL: "dual-random",
    Command.RSNORM: "rsnorm-torus",
    Command.LEAK: "leak",
}


def run_options(f):
    """Options shared by every run command"""
    options = [
        click.option('--config', '-c', 'config_path', type=click.Path(exists=True, dir_okay=False),
                     help='JSON or YAML run config'),
        click.option('--preset', '-p', help='Named preset (see: cli.py configs)'),
        click.option('--complex', 'complex_path', type=click.Path(exists=True, dir_okay=False),
                     help='Complex file to run on instead of the preset model'),
        click.option('--seed', type=int, help='Seed of the random model'),
        click.option('--backend', type=click.Choice(['exact', 'float']), help='Arithmetic backend'),
        click.option('--lambda', 'cuts', help='Comma separated spectral cuts, e.g. 0,1.5'),
        click.option('--theta', help="Agmon angle: 'auto' or a value in radians"),
        click.option('--count', type=int, help='Number of random instances'),
        click.option('--jobs', '-j', type=int, help='Worker threads for per-mode work'),
        click.option('--out', '-o', type=click.Path(dir_okay=False), help='Write the JSON report here'),
        click.option('--reports-dir', default='reports', show_default=True, help='Report store directory'),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def parse_cuts(text):
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise ValueError(f"Invalid --lambda value '{text}': expected comma separated numbers")


def resolve_config(command, config_path=None, preset=None, complex_path=None, seed=None, backend=None,
                   cuts=None, theta=None, count=None, jobs=None, deform_mode=None):
    """Preset or config file with the command-line overrides applied"""
    manager = RunConfigManager()
    if config_path:
        config = manager.load_file(config_path)
    else:
        name = preset or DEFAULT_PRESETS[command]
        config = manager.get_configuration(name)
        if config is None:
            raise ValueError(f"Preset '{name}' not found")
    if config.command != command:
        raise ValueError(f"Config '{config.name}' is for '{config.command.value}', not '{command.value}'")

    data = config.to_dict()
    if complex_path:
        data.update(model='file', path=complex_path, torus=None, random=None)
    if seed is not None:
        if not data.get('random'):
            raise ValueError("--seed needs a random model")
        data['random']['seed'] = seed
    if backend:
        data['backend'] = backend
    if cuts:
        data['cuts'] = parse_cuts(cuts)
    if theta:
        if theta == 'auto':
            data.update(theta='max_gap', theta_value=None)
        else:
            try:
                data.update(theta='explicit', theta_value=float(theta))
            except ValueError:
                raise ValueError(f"Invalid --theta value '{theta}': expected 'auto' or a number")
    if count is not None:
        data['count'] = count
    if jobs is not None:
        data['jobs'] = jobs
    if deform_mode:
        data['deform_mode'] = deform_mode
    return run_config_from_dict(data)


def execute(command, out=None, reports_dir='reports', **overrides):
    """Run one command, print the suite table, store the report and exit with its status"""
    try:
        configure_logging()
        config = resolve_config(command, **overrides)
        click.echo(f"Running {command.value} with config '{config.name}'...")
        report = LabRunner(config).run()
    except (TorsionLabError, ValueError) as e:
        click.echo(f"Error: {str(e)}", err=True)
        sys.exit(exit_code_for(e))

    for suite in report['suites']:
        marker = '✓' if suite['passed'] else '✗'
        click.echo(f"  {marker} {suite['name']}: residual {suite['residual']:.3e} (tol {suite['tolerance']:.1e})")
        if not suite['passed'] and suite.get('case'):
            click.echo(f"      case: {json.dumps(suite['case'], sort_keys=True)}")
    for warning in report['warnings']:
        click.echo(f"  ! {warning}")

    try:
        destination = out or config.output
        if destination:
            Path(destination).write_text(dumps(report))
            path = Path(destination)
        else:
            path = ReportStore(reports_dir).save_report(f"{command.value}-{config.name}", report)
    except (ValueError, OSError) as e:
        click.echo(f"Error: {str(e)}", err=True)
        sys.exit(1)
    click.echo(f"Report written to {path}")

    if report['passed']:
        click.echo(f"✓ {command.value} passed")
    else:
        click.echo(f"✗ {command.value} failed", err=True)
        sys.exit(1)


@click.group()
def cli():
    """TorsionLab - refined analytic torsion experiments"""
    pass


@cli.command('verify')
@run_options
def verify(**options):
    """Exact sign suites and randomized identity suites"""
    execute(Command.VERIFY, **options)


@cli.command('torsion')
@run_options
def torsion(**options):
    """rho_Gamma, rho_H and the eta identity for one complex"""
    execute(Command.TORSION, **options)


@cli.command('torus')
@run_options
def torus(**options):
    """Truncated flat torus: per-mode reports fused into rho_an"""
    execute(Command.TORUS, **options)


@cli.command('deform')
@run_options
@click.option('--mode', 'deform_mode', type=click.Choice(['metric', 'flux']), help='Deformation family')
def deform(**options):
    """Metric and flux deformation checks"""
    execute(Command.DEFORM, **options)


@cli.command('dual')
@run_options
def dual(**options):
    """Duality of the refined torsion"""
    execute(Command.DUAL, **options)


@cli.command('rsnorm')
@run_options
def rsnorm(**options):
    """Ray-Singer norm of rho_an"""
    execute(Command.RSNORM, **options)


@cli.command('leak')
@run_options
def leak(**options):
    """Boundary leak of a gauged flux under truncation"""
    execute(Command.LEAK, **options)


@cli.command('configs')
def list_configs():
    """List available presets"""
    manager = RunConfigManager()
    click.echo("Available presets:")
    for config in manager.list_configurations():
        click.echo(f"  - {config['name']} ({config['command']}, {config['model']})")
        click.echo(f"    {config['description']}")


@cli.group()
def report():
    """Stored report commands"""
    pass


@report.command('list')
@click.option('--reports-dir', default='reports', show_default=True)
def list_reports(reports_dir):
    """List stored reports"""
    names = ReportStore(reports_dir).list_reports()
    if not names:
        click.echo("No reports found.")
        return
    click.echo("Stored reports:")
    for name in names:
        click.echo(f"  - {name}")


def _load_report(source, reports_dir):
    path = Path(source)
    if path.is_file():
        with open(path, 'r') as f:
            return json.load(f)
    data = ReportStore(reports_dir).get_report(source)
    if data is None:
        raise ValueError(f"Report '{source}' not found")
    return data


@report.command('validate')
@click.argument('source')
@click.option('--reports-dir', default='reports', show_default=True)
def validate_report(source, reports_dir):
    """Validate a report file or stored report"""
    try:
        data = _load_report(source, reports_dir)
    except (ValueError, json.JSONDecodeError) as e:
        click.echo(f"Error: {str(e)}", err=True)
        sys.exit(1)

    validation = ReportStore(reports_dir).validate_report(data)
    if validation['valid']:
        click.echo(f"✓ Report '{source}' is valid")
        if validation['warnings']:
            click.echo("\nWarnings:")
            for warning in validation['warnings']:
                click.echo(f"  - {warning}")
    else:
        click.echo(f"✗ Report '{source}' is invalid", err=True)
        click.echo("\nErrors:")
        for error in validation['errors']:
            click.echo(f"  - {error}")
        sys.exit(1)


@cli.command('export')
@click.argument('source')
@click.option('--pdf', 'pdf_path', required=True, type=click.Path(dir_okay=False), help='Output PDF file')
@click.option('--reports-dir', default='reports', show_default=True)
def export_report(source, pdf_path, reports_dir):
    """Export a report as PDF"""
    try:
        data = _load_report(source, reports_dir)
        Path(pdf_path).write_bytes(export_pdf(data))
        click.echo(f"✓ Report exported to: {pdf_path}")
    except (TorsionLabError, ValueError, json.JSONDecodeError) as e:
        click.echo(f"Error: {str(e)}", err=True)
        sys.exit(exit_code_for(e))


if __name__ == '__main__':
    cli()
