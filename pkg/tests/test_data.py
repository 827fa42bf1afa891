import numpy as np
import pytest

from rmxest.data import COPPER, Dataset, digest, embedded, ingest, parse_csv
from rmxest.errors import InvalidData

# pinned digests of the embedded datasets; editing the data must fail here
COPPER_SHA256 = "2b9720537c4124ae7272eb5d4ae2cb4be0f18ad6ff269c9278cb7d1edc95260d"
POLONIUM_SHA256 = "03cee2ae71bcc28348c9afb50b15a3736e4ede9c82c094a6e0b16b431af6de47"


def test_copper_embedded():
    ds = embedded("copper")
    assert ds.n == 24 and ds.values.max() == 28.95
    assert list(ds.observations()) == sorted(COPPER)
    assert digest(ds) == COPPER_SHA256


def test_polonium_embedded():
    ds = embedded("polonium")
    assert ds.n == 2608 and ds.tabulated
    assert dict(zip(ds.values, ds.counts))[13.0] == 1
    assert digest(ds) == POLONIUM_SHA256


def test_unknown_embedded():
    with pytest.raises(InvalidData):
        ingest("embedded:lausanne")


def test_parse_single_column_with_header():
    ds = parse_csv("x\n1.5\n2.5\n0.5\n")
    assert ds.n == 3 and list(ds.values) == [0.5, 1.5, 2.5]


def test_parse_table():
    ds = parse_csv("value,count\n2,3\n0,1\n1,0\n")
    assert ds.tabulated and list(ds.values) == [0, 1, 2] and ds.n == 4


def test_parse_errors():
    with pytest.raises(InvalidData, match="line 3"):
        parse_csv("1\n2\nabc\n")
    with pytest.raises(InvalidData, match="negative count"):
        parse_csv("1,2\n2,-1\n")
    with pytest.raises(InvalidData):
        parse_csv("")
    with pytest.raises(InvalidData, match="inconsistent"):
        parse_csv("1\n2,3\n")


def test_empty_file(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    with pytest.raises(InvalidData):
        ingest(str(p))
    with pytest.raises(InvalidData):
        ingest(str(tmp_path / "missing.csv"))


def test_dataset_invariants():
    with pytest.raises(InvalidData):
        Dataset.from_observations([1.0])
    with pytest.raises(InvalidData):
        Dataset(np.array([2.0, 1.0]), np.array([1.0, 1.0]))
    ds = Dataset.from_table([(0, 2), (3, 1)])
    assert list(ds.observations()) == [0, 0, 3]
    assert ds.weights == pytest.approx([2 / 3, 1 / 3])
