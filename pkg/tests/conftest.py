import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dirimult.classifier import ClassPrior, fit_model
from dirimult.conjugate import Typology
from dirimult.dataio import load_period_corpus, load_reference_model

from helpers import EXPLICIT_CLASS_PRIOR


@pytest.fixture(scope="session")
def typology7():
    return Typology(("t1", "t2", "t3", "t4", "t5", "t6", "t7"))


@pytest.fixture(scope="session")
def period_corpus():
    return load_period_corpus()


@pytest.fixture(scope="session")
def period_model(period_corpus):
    """The bundled period posteriors with the explicit class prior."""
    return fit_model(
        period_corpus, class_prior=ClassPrior(EXPLICIT_CLASS_PRIOR)
    )


@pytest.fixture(scope="session")
def reference_model():
    return load_reference_model()
