import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import norm

from colp.ingest import (
    IngestError,
    PairFile,
    discretize,
    encode_levels,
    example_pairs_dir,
    load_pair,
    read_manifest,
    read_pair,
    write_pair,
)
from colp.sample import PairedSample


def write_csv(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_lexicographic_encoding():
    codes, lookup = encode_levels(["wood", "steel", "iron", "wood"])
    assert lookup == {"iron": 1, "steel": 2, "wood": 3}
    assert codes.tolist() == [3, 2, 1, 3]


def test_encoding_ignores_order_of_appearance():
    a = encode_levels(["b", "a", "c"])[1]
    b = encode_levels(["c", "c", "b", "a"])[1]
    assert a == b


def test_read_pair_levels_and_quotes(tmp_path):
    path = write_csv(tmp_path / "p.csv", 'material,span\nwood,"short"\nsteel,long\niron,medium\n"wood",long\n')
    sample = read_pair(PairFile(path, "material", "span"))
    assert sample.x.tolist() == [3, 2, 1, 3]
    assert sample.x_names() == ["iron", "steel", "wood"]
    assert sample.y_names() == ["long", "medium", "short"]


def test_single_level_column_rejected(tmp_path):
    path = write_csv(tmp_path / "p.csv", "a,b\n1,x\n2,x\n3,x\n")
    with pytest.raises(IngestError, match="distinct level"):
        read_pair(PairFile(path, "a", "b"))


def test_missing_column_and_empty_file(tmp_path):
    path = write_csv(tmp_path / "p.csv", "a,b\n1,2\n")
    with pytest.raises(IngestError, match="missing column"):
        read_pair(PairFile(path, "a", "c"))
    empty = write_csv(tmp_path / "e.csv", "")
    with pytest.raises(IngestError, match="empty"):
        read_pair(PairFile(empty, "a", "b"))
    with pytest.raises(IngestError):
        PairFile(path, "a", "a")


def test_missing_rows_dropped_and_counted(tmp_path, caplog):
    text = "x,y\na,p\nb,q\nNA,r\nc,\nc,r\na,q\n"
    path = write_csv(tmp_path / "p.csv", text)
    with caplog.at_level(logging.WARNING, logger="colp.ingest"):
        loaded = load_pair(PairFile(path, "x", "y"))
    assert loaded.rows_read == 6
    assert loaded.rows_dropped == 2
    assert loaded.sample.n == 4
    assert "dropped 2" in caplog.text


def test_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    sample = PairedSample(
        rng.integers(1, 5, 100), rng.integers(1, 4, 100), 4, 3,
        {"a": 1, "b": 2, "c": 3, "d": 4}, {"lo": 1, "mid": 2, "zz": 3},
    )
    path = tmp_path / "rt.csv"
    write_pair(sample, path, "cause", "effect")
    back = read_pair(PairFile(str(path), "cause", "effect"))
    assert np.array_equal(back.x, sample.x) and np.array_equal(back.y, sample.y)
    assert back.x_names() == sample.x_names()


def test_discretize_uniform_grid():
    codes, cuts = discretize(np.arange(1, 101), 5)
    assert np.bincount(codes)[1:].tolist() == [20, 20, 20, 20, 20]
    assert cuts.size == 4


def test_discretize_ties_go_to_lower_bin():
    # the median of 1..9 is exactly 5, which belongs to the lower bin
    codes, cuts = discretize(np.arange(1, 10), 2)
    assert cuts.tolist() == [5.0]
    assert codes.tolist() == [1, 1, 1, 1, 1, 2, 2, 2, 2]
    # linear quantiles of 1..5 sit at 1.8, 2.6, 3.4, 4.2
    codes, cuts = discretize([1, 2, 3, 4, 5], 5)
    np.testing.assert_allclose(cuts, [1.8, 2.6, 3.4, 4.2])
    assert codes.tolist() == [1, 2, 3, 4, 5]


def test_discretize_rejects_degenerate_input():
    with pytest.raises(IngestError):
        discretize(np.full(50, 3.0), 5)
    with pytest.raises(IngestError):
        discretize([1, 2, 3], 5)
    with pytest.raises(IngestError):
        discretize([1, 1, 1, 1, 1, 1, 1, 2, 3, 4], 5)
    with pytest.raises(IngestError):
        discretize([1, 2, 3], 1)


def test_discretize_normal_quantiles():
    x = np.random.default_rng(3).standard_normal(100_000)
    _, cuts = discretize(x, 5)
    np.testing.assert_allclose(cuts, norm.ppf([0.2, 0.4, 0.6, 0.8]), atol=0.02)


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=20, max_size=200, unique=True))
def test_discretize_monotone(values):
    codes, _ = discretize(values, 4)
    order = np.argsort(values)
    assert np.all(np.diff(codes[order]) >= 0)
    assert codes.min() == 1 and codes.max() == 4


def test_discretized_columns_in_pair(tmp_path):
    rng = np.random.default_rng(1)
    lines = ["g,v"] + [f"{'abc'[i % 3]},{val:.6f}" for i, val in enumerate(rng.normal(size=90))]
    path = write_csv(tmp_path / "d.csv", "\n".join(lines) + "\n")
    loaded = load_pair(PairFile(path, "g", "v", discretize_y=3))
    assert loaded.sample.L == 3
    assert loaded.sample.y_names() == ["q01", "q02", "q03"]
    assert len(loaded.cut_points["v"]) == 2


def test_manifest_errors(tmp_path):
    with pytest.raises(IngestError, match="no pairs.csv"):
        read_manifest(tmp_path)
    (tmp_path / "pairs.csv").write_text("file,x_column,y_column,truth,description\n")
    with pytest.raises(IngestError, match="lists no pairs"):
        read_manifest(tmp_path)
    (tmp_path / "pairs.csv").write_text("file,x_column\n")
    with pytest.raises(IngestError, match="missing manifest column"):
        read_manifest(tmp_path)
    (tmp_path / "pairs.csv").write_text("file,x_column,y_column,truth,description\na.csv,x,y,sideways,\n")
    with pytest.raises(IngestError, match=":2:"):
        read_manifest(tmp_path)


def test_shipped_manifest_loads():
    pairs = read_manifest(example_pairs_dir())
    assert len(pairs) == 6
    for pair in pairs:
        loaded = load_pair(pair)
        assert loaded.sample.S >= 3 and loaded.sample.L >= 3
        assert loaded.rows_dropped == 0
