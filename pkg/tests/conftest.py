import pytest

from rewriteqa.learning import load_qa, train
from rewriteqa.resources import Resources

from support import GANDHI, gandhi_config


@pytest.fixture(scope="session")
def gandhi_resources():
    return Resources.load(gandhi_config())


@pytest.fixture(scope="session")
def gandhi_qa():
    return load_qa(GANDHI / "qa.tsv")


@pytest.fixture(scope="session")
def gandhi_params(gandhi_resources, gandhi_qa):
    """Model trained on the family fixture with rewriting enabled."""
    return train(gandhi_qa, gandhi_resources, gandhi_config())


@pytest.fixture(scope="session")
def gandhi_base():
    """Resources and model for the rewriting-disabled base system."""
    config = gandhi_config(dict_path=None, template_db_path=None)
    resources = Resources.load(config)
    params = train(load_qa(GANDHI / "qa.tsv"), resources, config)
    return config, resources, params
