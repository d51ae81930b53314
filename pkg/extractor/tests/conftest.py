import pytest

from sample_data import build_sample


@pytest.fixture(scope="session")
def sample_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("sample")
    return build_sample(root, n_utts=10)
