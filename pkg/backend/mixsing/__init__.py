from pathlib import Path
from typing import Annotated, Optional, Tuple

import typer

__version__ = "0.1.0"

app = typer.Typer(help="Mixed local/nonlocal singular elliptic solvers.")

Dim = Annotated[Optional[int], typer.Option(help="1 (interval) or 2 (rectangle)")]
Extent = Annotated[Optional[Tuple[float, float]], typer.Option(help="interval a b on the x axis")]
ExtentY = Annotated[Optional[Tuple[float, float]], typer.Option(help="interval on the y axis")]
N = Annotated[Optional[int], typer.Option("--n", help="interior nodes per axis")]
NY = Annotated[Optional[int], typer.Option("--n-y", help="interior nodes on the y axis")]
Real = Annotated[Optional[float], typer.Option()]
Lam = Annotated[Optional[str], typer.Option("--lambda", help="a positive number or 'auto'")]
Name = Annotated[Optional[str], typer.Option(help="one, one-plus-t or one-plus-log")]
Int = Annotated[Optional[int], typer.Option()]
Dir = Annotated[Optional[Path], typer.Option()]
ConfigFile = Annotated[
    Optional[Path], typer.Option("--config", exists=True, dir_okay=False, help="key = value file")
]


def _run(command: str, flags: dict, config_path: Optional[Path]) -> int:
    # config reads the environment at import time
    import main
    from utils.errors import SolverError
    from utils.reports import write_failure

    try:
        config = main.build_config(command, flags, config_path)
    except SolverError as e:
        typer.echo(e.detail, err=True)
        output_dir = flags.get("output_dir")
        if output_dir is not None and main._writable(output_dir):
            write_failure(output_dir, command, e)
        return 2
    return main.run(config)


def _command(name: str):
    def command(
        dim: Dim = None,
        extent: Extent = None,
        extent_y: ExtentY = None,
        n: N = None,
        n_y: NY = None,
        s: Real = None,
        gamma: Real = None,
        lam: Lam = None,
        q: Real = None,
        r: Real = None,
        h: Name = None,
        eps0: Real = None,
        eps_ratio: Real = None,
        eps_floor: Real = None,
        tol: Real = None,
        max_iter: Int = None,
        seed: Int = None,
        output_dir: Dir = None,
        config: ConfigFile = None,
    ):
        options = dict(locals())
        flags = {key: value for key, value in options.items() if key not in ("config", "name")}
        raise typer.Exit(code=_run(name, flags, config))

    command.__name__ = name.replace("-", "_")
    return command


for name in ("eigen", "pure-singular", "g1", "g2", "sweep-lambda", "verify"):
    app.command(name)(_command(name))


if __name__ == "__main__":
    app()
