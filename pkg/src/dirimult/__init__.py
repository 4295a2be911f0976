"""dirimult: Bayesian classification of categorical count vectors.

Per-class Dirichlet posteriors are fit by conjugate updating from a
symmetric non-informative prior (Perks, 1/J, by default), and unlabeled
count vectors are scored with the closed-form posterior predictive
(Dirichlet-multinomial) combined with a class prior.
"""

from dirimult.classifier import (
    ClassPrior,
    Classification,
    FittedModel,
    classify,
    classify_batch,
    empirical_class_prior,
    fit_model,
    log_predictive_likelihood,
)
from dirimult.conjugate import (
    BetaMarginal,
    CountVector,
    DirichletParams,
    PriorFamily,
    Typology,
    log_dirichlet_pdf,
    log_multinomial_pmf,
    marginal_beta,
    perks_prior,
    posterior_mean_table,
    posterior_update,
    prior_params,
)
from dirimult.errors import (
    CsvFormatError,
    DirimultError,
    ModelFormatError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Typology",
    "CountVector",
    "DirichletParams",
    "BetaMarginal",
    "PriorFamily",
    "perks_prior",
    "prior_params",
    "posterior_update",
    "log_multinomial_pmf",
    "log_dirichlet_pdf",
    "marginal_beta",
    "posterior_mean_table",
    "ClassPrior",
    "FittedModel",
    "Classification",
    "log_predictive_likelihood",
    "empirical_class_prior",
    "classify",
    "classify_batch",
    "fit_model",
    "DirimultError",
    "ValidationError",
    "CsvFormatError",
    "ModelFormatError",
]
