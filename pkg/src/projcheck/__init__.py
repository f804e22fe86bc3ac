"""Exact projectibility checks and inference for discrete exponential families."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BoundaryObservation,
    Degenerate,
    IncompleteTable,
    IndexOutOfRange,
    InternalInconsistency,
    MaxIterations,
    MissingCovariates,
    NotNested,
    ProjcheckError,
    SchemaError,
    SpaceTooLarge,
    UnknownStatistic,
    UnsupportedStatistic,
)
from .expfam import (  # noqa: E402
    ExpFamModel,
    increment_mgf,
    log_partition,
    log_probability,
    moments,
    predictive_distribution,
    statistic_distribution,
)
from .projectivity import ProjectivityReport, projectivity_report  # noqa: E402
from .spec_io import ModelSpec, load_spec, parse_model_spec  # noqa: E402
from .statespace import (  # noqa: E402
    Configuration,
    IndexSet,
    SiteSpaceFamily,
    enumerate_configurations,
    extend_configuration,
    project_configuration,
    site_count,
)
from .statistics import (  # noqa: E402
    CovariateTable,
    DyadicTerm,
    EdgeCount,
    IsingNearestNeighbor,
    KStarCount,
    LookupTable,
    StatisticSpec,
    TriangleCount,
    eval_statistic,
    statistic_increment,
)
from .volume import VolumeTables, build_volume_tables, marginal_volume  # noqa: E402
