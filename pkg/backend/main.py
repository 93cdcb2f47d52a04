import logging
import os
from pathlib import Path
from typing import Literal, Optional, Tuple, Union

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field as PydanticField,
    ValidationError,
    field_validator,
    model_validator,
)

from apps.diagnostics.main import (
    dense_eigen_oracle,
    gradient_check,
    symmetry_defect,
    weak_residual,
)
from apps.eigen.main import local_eigenpair, principal_eigenpair
from apps.grid.main import build_domain, is_symmetric_domain, norms
from apps.grid.models import Domain
from apps.multiplicity.main import calibrate_geometry, energy, solve_g2, sweep_lambda
from apps.operator.main import assemble, check_m_matrix
from apps.singular.main import solve_g1, solve_pure_singular
from apps.singular.models import H_FUNCTIONS, ContinuationTrace, ProblemSpec
from config import (
    DATA_DIR,
    DEFAULT_MAX_ITER,
    DEFAULT_SEED,
    DEFAULT_TOL,
    DENSE_ORACLE_LIMIT,
    EPS0,
    EPS_FLOOR,
    EPS_RATIO,
    SRC_LOG_LEVELS,
    load_config_file,
    resolve_settings,
)
from constants import ERROR_MESSAGES, MESSAGES, STAGES
from utils.errors import SolverError, ValidationFailure
from utils.misc import eps_schedule
from utils.reports import write_failure, write_report

log = logging.getLogger(__name__)
log.setLevel(SRC_LOG_LEVELS["MAIN"])

COMMANDS = ("eigen", "pure-singular", "g1", "g2", "sweep-lambda", "verify")
G2_COMMANDS = ("g2", "sweep-lambda", "verify")


##################################
#
# Run configuration
#
##################################


class RunConfig(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    command: Literal["eigen", "pure-singular", "g1", "g2", "sweep-lambda", "verify"]
    dim: int = 1
    extent: Tuple[float, float] = (-1.0, 1.0)
    extent_y: Optional[Tuple[float, float]] = None
    n: int = 127
    n_y: Optional[int] = None
    s: float = 0.5
    gamma: float = 0.5
    lam: Union[float, Literal["auto"]] = PydanticField(1.0, alias="lambda")
    q: float = 2.0
    r: Optional[float] = None
    h: str = "one"
    eps0: float = EPS0
    eps_ratio: float = EPS_RATIO
    eps_floor: float = EPS_FLOOR
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    seed: int = DEFAULT_SEED
    output_dir: Path = DATA_DIR
    sources: dict[str, str] = {}

    @field_validator("extent", "extent_y", mode="before")
    @classmethod
    def split_pair(cls, v):
        if isinstance(v, str):
            return tuple(v.replace(",", " ").split())
        return v

    @model_validator(mode="after")
    def check_ranges(self):
        errors = []
        if self.dim not in (1, 2):
            errors.append(ERROR_MESSAGES.INVALID_DIM(self.dim))
        if not (0.0 < self.s < 1.0):
            errors.append(ERROR_MESSAGES.INVALID_S(self.s))
        if not (0.0 < self.gamma < 1.0):
            errors.append(ERROR_MESSAGES.INVALID_GAMMA(self.gamma))
        if self.lam == "auto":
            if self.command not in G2_COMMANDS:
                errors.append("lambda 'auto' is only defined for the g2 commands")
        elif not self.lam > 0.0:
            errors.append(ERROR_MESSAGES.INVALID_LAMBDA(self.lam))
        exponent_l = self.r if self.r is not None else self.q + 2.0
        if self.command in G2_COMMANDS and not (1.0 < self.q < exponent_l - 1.0):
            errors.append(
                ERROR_MESSAGES.INVALID_Q(f"need 1 < q < l - 1, got q={self.q}, l={exponent_l}")
            )
        if self.h not in H_FUNCTIONS:
            errors.append(ERROR_MESSAGES.UNKNOWN_H(self.h))
        if not (self.eps0 > 0.0 and 0.0 < self.eps_ratio < 1.0 and 0.0 < self.eps_floor <= self.eps0):
            errors.append("eps schedule needs eps0 > 0, 0 < eps_ratio < 1, 0 < eps_floor <= eps0")
        if not self.tol > 0.0:
            errors.append(ERROR_MESSAGES.INVALID_TOL(self.tol))
        if self.max_iter < 1:
            errors.append(f"max_iter must be at least 1, got {self.max_iter}")
        if not _writable(self.output_dir):
            errors.append(ERROR_MESSAGES.OUTPUT_DIR_NOT_WRITABLE(self.output_dir))
        if errors:
            raise ValueError("\n".join(errors))
        return self

    def domain(self) -> Domain:
        extents = [self.extent]
        counts = [self.n]
        if self.dim == 2:
            extents.append(self.extent_y or self.extent)
            counts.append(self.n_y or self.n)
        return build_domain(self.dim, extents, counts)

    def problem(self, kind: str, lam: Optional[float] = None) -> ProblemSpec:
        lam = lam if lam is not None else self.lam
        return ProblemSpec(
            kind=kind,
            s=self.s,
            gamma=self.gamma,
            lam=lam,
            q=self.q if kind == "g2" else None,
            r=self.r if kind == "g2" else None,
            h=self.h if kind == "g1" else None,
        )

    def schedule(self) -> list[float]:
        return list(eps_schedule(self.eps0, self.eps_ratio, self.eps_floor))

    def echo(self) -> dict:
        data = self.model_dump(mode="json", by_alias=True, exclude={"command", "sources"})
        return {
            name: {"value": value, "source": self.sources.get(name, "default")}
            for name, value in data.items()
        }


def _writable(path: Path) -> bool:
    path = Path(path).resolve()
    while not path.exists():
        path = path.parent
    return os.access(path, os.W_OK)


def build_config(command: str, flags: dict, config_path: Optional[Path] = None) -> RunConfig:
    """
    Resolves every setting as flag > config file > default and validates the
    result, reporting all violations at once.
    """
    try:
        file_data = load_config_file(config_path)
        if "lambda" in file_data:
            file_data["lam"] = file_data.pop("lambda")
        defaults = {
            name: field.default
            for name, field in RunConfig.model_fields.items()
            if name not in ("command", "sources")
        }
        settings = resolve_settings(defaults, file_data, flags)
        return RunConfig(
            command=command,
            sources={("lambda" if k == "lam" else k): v.source for k, v in settings.items()},
            **{name: value.value for name, value in settings.items()},
        )
    except ValidationError as e:
        messages = [err["msg"].removeprefix("Value error, ") for err in e.errors()]
        raise ValidationFailure(
            ERROR_MESSAGES.INVALID_CONFIG("\n".join(messages)),
            stage=STAGES.CONFIG,
            data={"errors": messages},
        ) from e
    except (ValueError, OSError) as e:
        raise ValidationFailure(ERROR_MESSAGES.INVALID_CONFIG(e), stage=STAGES.CONFIG) from e


##################################
#
# Pipelines
#
##################################


def run_eigen(config: RunConfig):
    op = assemble(config.domain(), config.s)
    eig = principal_eigenpair(op)
    local = local_eigenpair(op)
    report = {
        **eig.summary(),
        "lambda1_local": local.lambda1,
        "operator": check_m_matrix(op).model_dump(),
    }
    return report, {"e1": eig.e1}


def run_pure_singular(config: RunConfig):
    op = assemble(config.domain(), config.s)
    trace = ContinuationTrace()
    v0 = solve_pure_singular(
        op, config.gamma, config.schedule(), config.tol, config.max_iter, trace=trace
    )
    gamma = config.gamma
    residual = weak_residual(op, lambda t: t ** (-gamma), v0, seed=config.seed, singular=True)
    report = {
        "norms": norms(v0).model_dump(),
        "min_interior": float(v0.values.min()),
        "trace": trace.model_dump(),
        "weak_residual": residual.max_weak_residual,
    }
    if is_symmetric_domain(op.domain):
        report["symmetry_defect"] = symmetry_defect(v0)
    return report, {"v0": v0}


def run_g1(config: RunConfig):
    op = assemble(config.domain(), config.s)
    spec = config.problem("g1")
    eig = principal_eigenpair(op)
    v0 = solve_pure_singular(op, config.gamma, config.schedule(), config.tol, config.max_iter)
    certificate = solve_g1(op, eig, spec, config.tol, config.max_iter, v0=v0, seed=config.seed)
    report = {
        "lambda": spec.lam,
        "lambda1": eig.lambda1,
        "v0_linf": float(v0.values.max()),
        **certificate.summary(),
    }
    fields = {
        "solution": certificate.solution,
        "sub": certificate.sub,
        "sup": certificate.sup,
        "v0": v0,
    }
    return report, fields


def _geometry(config: RunConfig, op, eig):
    """The geometry does not depend on lambda; calibrate it with a placeholder value."""
    schedule = config.schedule()
    spec = config.problem("g2", lam=1.0)
    return calibrate_geometry(op, eig, spec, schedule[0], seed=config.seed)


def run_g2(config: RunConfig):
    op = assemble(config.domain(), config.s)
    eig = principal_eigenpair(op)
    params = _geometry(config, op, eig)
    lam = params.Lambda_est / 4.0 if config.lam == "auto" else config.lam
    spec = config.problem("g2", lam=lam)
    solutions = solve_g2(
        op,
        eig,
        spec,
        config.schedule(),
        config.tol,
        config.max_iter,
        config.seed,
        params=params,
    )
    fields = {"nu": solutions.nu, "zeta": solutions.zeta, "xi": solutions.xi}
    return solutions.summary(), fields


def run_sweep_lambda(config: RunConfig):
    op = assemble(config.domain(), config.s)
    eig = principal_eigenpair(op)
    spec = config.problem("g2", lam=1.0)
    sweep = sweep_lambda(
        op,
        eig,
        spec,
        schedule=config.schedule(),
        tol=config.tol,
        max_iter=config.max_iter,
        seed=config.seed,
    )
    return sweep.model_dump(mode="json"), {}


def verify_suite(config: RunConfig) -> dict:
    """
    Property checks on one configuration: operator symmetry and sign pattern,
    eigen cross-checks, gradient consistency, rim geometry and the weak
    residual and symmetry of the pure singular solution.
    """
    domain = config.domain()
    op = assemble(domain, config.s)
    checks = {}

    def record(name, value, passed):
        checks[name] = {"value": float(value), "passed": bool(passed)}
        if not passed:
            log.warning(f"verify: {name} failed with value {value}")

    op_check = check_m_matrix(op)
    record("operator_symmetry", op_check.symmetry_defect, op_check.symmetry_defect <= 1e-12)
    record("m_matrix_offdiag", op_check.max_offdiag, op_check.is_m_matrix)

    eig = principal_eigenpair(op)
    local = local_eigenpair(op)
    record("e1_positive", eig.min_interior, eig.min_interior > 0.0)
    record("mixed_above_local", eig.lambda1 - local.lambda1, eig.lambda1 >= local.lambda1)
    if domain.dim == 1:
        (a, b), h = domain.extent[0], domain.h[0]
        exact = 4.0 / h**2 * np.sin(np.pi * h / (2.0 * (b - a))) ** 2
        error = abs(local.lambda1 - exact) / exact
        record("local_closed_form", error, error <= 1e-12)
    if domain.size <= DENSE_ORACLE_LIMIT:
        dense = dense_eigen_oracle(op)
        error = abs(dense[0] - eig.lambda1) / eig.lambda1
        record("dense_oracle", error, error <= 1e-10)

    spec = config.problem("g2", lam=1.0)
    for eps in (1.0, 1e-2, 1e-4):
        result = gradient_check(op, spec, eps, seed=config.seed)
        record(f"gradient_eps_{eps:g}", result.max_error, result.max_error <= 1e-6)

    params = calibrate_geometry(op, eig, spec, config.eps0, seed=config.seed)
    record("rim_violations", params.rim_violations, params.rim_violations == 0)
    half = spec.model_copy(update={"lam": 0.5 * params.Lambda_est})
    endpoint_energy = energy(op, half, config.eps0, params.endpoint)
    record("endpoint_energy", endpoint_energy, endpoint_energy < -1.0)

    v0 = solve_pure_singular(op, config.gamma, config.schedule(), config.tol, config.max_iter)
    gamma = config.gamma
    residual = weak_residual(op, lambda t: t ** (-gamma), v0, seed=config.seed, singular=True)
    record("pure_singular_residual", residual.max_weak_residual, residual.max_weak_residual < 1e-6)
    if is_symmetric_domain(domain):
        defect = symmetry_defect(v0)
        record("pure_singular_symmetry", defect, defect < 1e-8)

    return {"checks": checks, "passed": all(c["passed"] for c in checks.values())}


def run_verify(config: RunConfig):
    return verify_suite(config), {}


PIPELINES = {
    "eigen": run_eigen,
    "pure-singular": run_pure_singular,
    "g1": run_g1,
    "g2": run_g2,
    "sweep-lambda": run_sweep_lambda,
    "verify": run_verify,
}


##################################
#
# Dispatcher
#
##################################


def run(config: RunConfig) -> int:
    """Runs the configured pipeline and writes its report; returns the exit status."""
    for name, setting in config.echo().items():
        log.info(f"{name} = {setting['value']} ({setting['source']})")

    try:
        result, fields = PIPELINES[config.command](config)
    except SolverError as e:
        log.exception(e)
        write_failure(config.output_dir, config.command, e)
        return 1
    except np.linalg.LinAlgError as e:
        log.exception(e)
        error = SolverError(ERROR_MESSAGES.DEFAULT(e), stage=STAGES.CLI)
        write_failure(config.output_dir, config.command, error)
        return 1

    report = {"command": config.command, "config": config.echo(), "result": result}
    write_report(config.output_dir, config.command, report, fields)
    if config.command == "verify" and not result["passed"]:
        return 1
    log.info(MESSAGES.PIPELINE_DONE(config.command))
    return 0
