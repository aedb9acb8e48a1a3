import pytest

from absa_eval.ingest import RESTAURANT_CATEGORIES, load_dataset
from absa_eval.synth import DATASETS, write_all
from absa_eval.types import schema_for


@pytest.fixture(scope="session")
def fixtures_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("datasets")
    write_all(root)
    return root


def load_fixture(fixtures_root, name):
    from absa_eval.synth import DATASET_SPECS

    ds = DATASET_SPECS[name]
    vocab = RESTAURANT_CATEGORIES if ds.domain == "restaurant" else None
    return load_dataset(fixtures_root / name, ds.adapter, schema_for(ds.task), name, vocab)


@pytest.fixture(scope="session")
def bundles(fixtures_root):
    return {ds.name: load_fixture(fixtures_root, ds.name) for ds in DATASETS}
