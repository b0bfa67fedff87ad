from pathlib import Path

import pytest

from absa_promptkit.corpus import collect_categories, load_absa_corpus, load_polarity_corpus
from absa_promptkit.prompting import Regime, TemplateConfig, Verbalizer

DATA_DIR = Path(__file__).parent / "data"
ABSA_FIXTURE = DATA_DIR / "absa_fixture.xml"
POLARITY_FIXTURE = DATA_DIR / "polarity_fixture.tsv"


@pytest.fixture(scope="session")
def absa_sentences():
    return load_absa_corpus(ABSA_FIXTURE)


@pytest.fixture(scope="session")
def fixture_categories(absa_sentences):
    return collect_categories(absa_sentences)


@pytest.fixture(scope="session")
def polarity_docs():
    return load_polarity_corpus(POLARITY_FIXTURE)


@pytest.fixture
def en_verbalizer():
    return Verbalizer.english()


@pytest.fixture
def cs_verbalizer():
    return Verbalizer.czech()


@pytest.fixture
def cfg():
    return TemplateConfig(regime=Regime.TRADITIONAL)
