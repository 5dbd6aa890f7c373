"""``beamlab`` command line.

Every subcommand starts from its experiment's defaults, applies ``--config``
(a TOML file, see :mod:`beamlab.harness.config`) and then the flags.  Exit
status: 0 success, 2 rejected configuration, 3 numerical failure.
"""
from __future__ import annotations

import sys

import click

from ..errors import ConfigError, NumericalError
from . import config as config_mod
from .experiments import REGISTRY, default_config, list_experiments
from .runner import dumps_json, run

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


def _floats(text):
    if text is None:
        return None
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list {text!r}", "comma-separated numbers") from exc


def _value(text):
    """TOML scalar if it parses as one (``1e-2``, ``true``, ``"x"``), else the raw string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


_FLAGS = [
    click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                 help="TOML config applied before the flags."),
    click.option("--n", "n", type=int, help="Spatial dimension."),
    click.option("--N", "N", type=int, help="Grid points per dimension (power of two)."),
    click.option("--L", "L", type=float, help="Period length."),
    click.option("--kappa", type=float, help="Nonlinearity power."),
    click.option("--omega", type=float, help="Nonlinearity sign (-1, 0, +1)."),
    click.option("--s", "s", type=float, help="Sobolev regularity."),
    click.option("--dt", type=float, help="Splitting time step."),
    click.option("--tol", type=float, help="Solver tolerance."),
    click.option("--nodes", type=int, help="Duhamel mesh intervals per unit time."),
    click.option("--M-max", "M_max", type=int, help="Maximum Picard iterations."),
    click.option("--eps", help="Comma-separated eps sweep."),
    click.option("--nu", help="Comma-separated nu sweep."),
    click.option("--lam", help="Comma-separated lambda sweep."),
    click.option("--times", help="Comma-separated times."),
    click.option("--seed", type=int, help="Seed of the PCG64 generator."),
    click.option("--out", "output", help="Directory that receives run directories."),
    click.option("--grid", "grid_spec", metavar="N,L", help="Grid points and period in one flag."),
    click.option("--amp", type=float, help="Data amplitude (sets params.amp)."),
    click.option("--p", "p_exp", help="Time exponent (sets params.p; 'inf' allowed)."),
    click.option("--q", "q_exp", help="Space exponent of a pair (sets params.q)."),
    click.option("--r", "r_exp", help="Space exponent of a triple (sets params.r)."),
    click.option("-p", "--param", "params", multiple=True, metavar="KEY=VALUE",
                 help="Experiment parameter; repeatable."),
    click.option("--dump-config", type=click.Path(dir_okay=False),
                 help="Write the resolved config to this file and exit."),
    click.option("--no-write", is_flag=True, help="Do not create a run directory."),
    click.option("--json", "as_json", is_flag=True, help="Print the report JSON."),
]


def _with_flags(fn):
    for opt in reversed(_FLAGS):
        fn = opt(fn)
    return fn


def build_config(tag, config_path=None, params=(), amp=None, eps=None, nu=None, lam=None,
                 times=None, grid_spec=None, p_exp=None, q_exp=None, r_exp=None, **flags):
    """Resolve defaults, config file and flags into a :class:`RunConfig`."""
    cfg = default_config(tag)
    if config_path:
        loaded = config_mod.load(config_path, default_config)
        if loaded.experiment != tag:
            raise ConfigError(f"config is for {loaded.experiment!r}, not {tag!r}", "matching experiment")
        cfg = loaded
    upd = {k: v for k, v in flags.items() if v is not None}
    if grid_spec is not None:
        parts = grid_spec.split(",")
        if len(parts) != 2:
            raise ConfigError(f"--grid expects N,L, got {grid_spec!r}", "--grid N,L")
        try:
            upd["N"], upd["L"] = int(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ConfigError(f"--grid expects N,L, got {grid_spec!r}", "--grid N,L") from exc
    for key, text in (("eps", eps), ("nu", nu), ("lam", lam), ("T", times)):
        vals = _floats(text)
        if vals is not None:
            upd[key] = vals
    extra = {}
    for item in params:
        if "=" not in item:
            raise ConfigError(f"parameter {item!r} is not KEY=VALUE", "KEY=VALUE")
        k, v = item.split("=", 1)
        extra[k.strip()] = _value(v.strip())
    if amp is not None:
        extra["amp"] = amp
    for key, val in (("p", p_exp), ("q", q_exp), ("r", r_exp)):
        if val is not None:
            extra[key] = val
    return cfg.with_updates(params=extra, **upd)


def _execute(tag, dump_config=None, no_write=False, as_json=False, **kw):
    try:
        cfg = build_config(tag, **kw)
        if dump_config:
            cfg.dump(dump_config)
            click.echo(dump_config)
            return
        report = run(cfg, write=not no_write)
    except ConfigError as exc:
        click.echo(f"configuration rejected: {exc}", err=True)
        if getattr(exc, "constraint", None):
            click.echo(f"violated constraint: {exc.constraint}", err=True)
        sys.exit(2)
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        if getattr(exc, "payload", None):
            click.echo(dumps_json(exc.payload), err=True)
        sys.exit(3)
    if as_json:
        click.echo(report.to_json(), nl=False)
    else:
        _summary(report)


def _summary(report):
    res = report.results
    scalars = {k: v for k, v in res.items() if not isinstance(v, (list, dict))}
    click.echo(f"{report.config.experiment} [{report.config_hash}]")
    for k in sorted(scalars):
        click.echo(f"  {k}: {scalars[k]}")
    if report.run_dir is not None:
        click.echo(f"  run directory: {report.run_dir}")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="artifact")
def cli():
    """Spectral experiments for the nonlinear beam equation u_tt + Delta^2 u = omega |u|^(kappa-1) u."""


def _register(tag):
    exp = REGISTRY[tag]

    @_with_flags
    def command(**kw):
        _execute(tag, **kw)

    command.__doc__ = exp.certifies[0].upper() + exp.certifies[1:] + "."
    cli.command(name=tag)(command)


for _tag in sorted(REGISTRY):
    _register(_tag)


@cli.command(name="list")
@click.option("--json", "as_json", is_flag=True)
def list_cmd(as_json):
    """List experiments with the module operation each one exercises."""
    cat = list_experiments()
    if as_json:
        click.echo(dumps_json(cat), nl=False)
        return
    for row in cat:
        click.echo(f"{row['tag']:<17} {row['module']}.{row['op']}")
        click.echo(f"{'':<17} {row['certifies']}")


@cli.command(name="run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "output")
@click.option("--no-write", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
def run_cmd(config_path, output, no_write, as_json):
    """Run the experiment named in a config file."""
    try:
        tag = config_mod.load(config_path).experiment
    except ConfigError as exc:
        click.echo(f"configuration rejected: {exc}", err=True)
        sys.exit(2)
    _execute(tag, config_path=config_path, output=output, no_write=no_write, as_json=as_json)


def main(argv=None):
    cli.main(args=argv, prog_name="beamlab")


if __name__ == "__main__":
    main()
