from enum import Enum


class MESSAGES(str, Enum):
    DEFAULT = lambda msg="": f"{msg if msg else ''}"
    REPORT_WRITTEN = lambda path="": f"Report written to '{path}'."
    PIPELINE_DONE = lambda name="": f"Pipeline '{name}' finished successfully."


class STAGES(str, Enum):
    CONFIG = "config"
    GRID = "domain_grid"
    OPERATOR = "mixed_operator"
    EIGEN = "eigen_solver"
    SINGULAR = "singular_solver"
    MULTIPLICITY = "multiplicity_solver"
    DIAGNOSTICS = "diagnostics"
    CLI = "cli"


class ERROR_MESSAGES(str, Enum):
    def __str__(self) -> str:
        return super().__str__()

    DEFAULT = lambda err="": f"Something went wrong :/\n{err if err else ''}"

    # domain_grid
    INVALID_DIM = lambda dim="": f"Dimension must be 1 or 2, got {dim}."
    DEGENERATE_INTERVAL = (
        lambda axis="": f"Interval on axis {axis} is degenerate; need a < b."
    )
    TOO_FEW_NODES = (
        lambda axis="": f"Axis {axis} needs at least 3 interior nodes."
    )
    SHAPE_MISMATCH = lambda err="": f"Field does not match its domain: {err}"
    DOMAIN_MISMATCH = "Fields/operator live on different domains."

    # mixed_operator
    INVALID_S = lambda s="": f"Fractional order s must lie in (0,1), got {s}."

    # eigen_solver
    EIGEN_NOT_CONVERGED = (
        lambda n="": f"Inverse iteration did not converge after {n} iterations."
    )
    EIGEN_NOT_POSITIVE = (
        "Principal eigenvector has a negative interior node beyond tolerance."
    )
    EIGEN_RESIDUAL = (
        lambda r="": f"Principal eigenpair residual {r} exceeds EIGEN_RESIDUAL_TOL."
    )
    INVALID_TOL = lambda tol="": f"Tolerance must be positive, got {tol}."

    # singular_solver
    INVALID_GAMMA = lambda g="": f"gamma must lie in the admissible range (0,1), got {g}."
    INVALID_LAMBDA = lambda l="": f"lambda must be positive, got {l}."
    INVALID_Q = lambda err="": f"q is outside the admissible range: {err}"
    INVALID_H = lambda err="": f"h does not satisfy (h1): {err}"
    UNKNOWN_H = lambda name="": f"Unknown h '{name}'; use one, one-plus-t or one-plus-log."
    WRONG_PROBLEM_KIND = lambda kind="": f"Operation requires a {kind} problem."
    NEWTON_NOT_CONVERGED = (
        lambda n="": f"Newton iteration did not converge after {n} iterations."
    )
    LINE_SEARCH_FAILED = "Backtracking line search could not reduce the residual."
    CONTINUATION_STAGNATED = (
        "Epsilon continuation reached the floor without becoming Cauchy."
    )
    NOT_POSITIVE = lambda node="": f"Field is not positive at interior node {node}."
    A_LAMBDA_NOT_FOUND = "No admissible a_lambda within the halving budget; h may violate (h2) near 0."
    B_LAMBDA_NOT_FOUND = "No admissible b_lambda within the doubling budget; h may violate (h2) at infinity."
    ORDERING_VIOLATED = (
        lambda err="": f"Sub/supersolution ordering violated during monotone iteration: {err}"
    )

    # multiplicity_solver
    EPS_REQUIRED = "The regularized gradient requires eps > 0."
    ASCENT_FAILED = "Embedding-constant ascent failed to produce a positive constant."
    T_NOT_FOUND = "Could not find an endpoint T with energy below -1."
    LAMBDA_TOO_LARGE = (
        lambda err="": f"lambda is not below the certified geometry threshold: {err}"
    )
    MINIMIZER_ON_RIM = "Ball minimizer is pinned to the rim; geometry violated (lambda too large?)."
    ENERGY_NOT_NEGATIVE = lambda e="": f"Ball minimizer energy {e} is not negative."
    MOUNTAIN_PASS_STALLED = (
        lambda g="": f"Mountain-pass descent stalled with gradient norm {g}."
    )
    MOUNTAIN_PASS_LEVEL = (
        lambda err="": f"Mountain-pass critical point is below the rim level: {err}"
    )
    BARRIER_VIOLATED = lambda err="": f"Iterate falls below the barrier: {err}"
    BRANCH_COLLAPSE = lambda err="": f"The two solution branches collapsed: {err}"

    # diagnostics
    SIZE_GUARD = lambda n="": f"Dense oracle refused: {n} unknowns exceeds the size guard."

    # cli
    INVALID_CONFIG = lambda err="": f"Invalid configuration:\n{err}"
    OUTPUT_DIR_NOT_WRITABLE = lambda path="": f"Output directory '{path}' is not writable."
