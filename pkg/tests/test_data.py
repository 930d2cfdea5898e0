import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from zerosel.data import (
    DataError,
    SyntheticParams,
    class_attributes_from_instances,
    compute_class_centers,
    expand_centers,
    expand_semantic_labels,
    export_synthetic,
    generate_synthetic_zero_shot,
    load_attribute_table,
    load_labels,
    load_matrix,
    read_key_values,
    read_report,
    write_labels,
    write_matrix,
    write_report,
)


def _write(tmp_path, text, name="f.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


# -- load_matrix ------------------------------------------------------------

def test_load_matrix_parses_rows_in_order(tmp_path):
    out = load_matrix(_write(tmp_path, "1,2\n3,4\n"))
    np.testing.assert_array_equal(out, [[1, 2], [3, 4]])


def test_load_matrix_ragged(tmp_path):
    with pytest.raises(DataError, match="ragged row at line 2"):
        load_matrix(_write(tmp_path, "1,2\n3\n"))


def test_load_matrix_nan_cell_named(tmp_path):
    with pytest.raises(DataError, match=r"'nan' at line 2, column 1"):
        load_matrix(_write(tmp_path, "1,2\nnan,4\n"))


@pytest.mark.parametrize("text, pattern", [
    ("1,x\n", r"non-numeric cell 'x' at line 1, column 2"),
    ("", "empty file"),
    ("\n\n", "empty file"),
    ("1,inf\n", "non-finite"),
])
def test_load_matrix_bad_contents(tmp_path, text, pattern):
    with pytest.raises(DataError, match=pattern):
        load_matrix(_write(tmp_path, text))


def test_load_matrix_missing_file(tmp_path):
    with pytest.raises(DataError, match="not found"):
        load_matrix(tmp_path / "nope.csv")


# -- labels and attribute tables -----------------------------------------------

def test_load_labels(tmp_path):
    labels = load_labels(_write(tmp_path, "0\n1\n0\n", "l.txt"))
    np.testing.assert_array_equal(labels, [0, 1, 0])
    assert labels.max() + 1 == 2


@pytest.mark.parametrize("text, pattern", [
    ("0\n2\n", "class 1 has no members"),
    ("-1\n", "negative"),
    ("0\n1.5\n", "non-integer"),
])
def test_load_labels_errors(tmp_path, text, pattern):
    with pytest.raises(DataError, match=pattern):
        load_labels(_write(tmp_path, text, "l.txt"))


def test_load_attribute_table(tmp_path):
    table = load_attribute_table(_write(tmp_path, "1,0\n0,1\n"), 2)
    assert table.shape == (2, 2)
    with pytest.raises(DataError, match="expected 3 attribute rows"):
        load_attribute_table(_write(tmp_path, "1,0\n0,1\n"), 3)
    with pytest.raises(DataError, match="empty"):
        load_attribute_table(_write(tmp_path, ""), 1)


@pytest.mark.parametrize("attrs, labels, expected", [
    ([[1, 0], [0, 1]], [0, 0], [[0.5, 0.5]]),
    ([[2, 2]], [0], [[2, 2]]),
    ([[1, 1], [3, 3], [5, 5]], [0, 0, 1], [[2, 2], [5, 5]]),
])
def test_class_attributes_from_instances(attrs, labels, expected):
    np.testing.assert_array_equal(class_attributes_from_instances(attrs, labels), expected)


def test_class_attributes_dimension_mismatch():
    with pytest.raises(DataError):
        class_attributes_from_instances([[1, 0]], [0, 0])


def test_expand_semantic_labels():
    out = expand_semantic_labels([0, 1, 0], [[1, 0], [0, 1]])
    np.testing.assert_array_equal(out, [[1, 0], [0, 1], [1, 0]])
    np.testing.assert_array_equal(expand_semantic_labels([0], [[7]]), [[7]])
    with pytest.raises(DataError):
        expand_semantic_labels([0, 1], np.zeros((3, 2)))


labels_strategy = st.integers(1, 5).flatmap(
    lambda c: st.lists(st.integers(0, c - 1), min_size=c, max_size=30).map(
        lambda tail: np.array(list(range(c)) + tail)
    )
)


@given(labels=labels_strategy, data=st.data())
def test_expand_then_average_is_identity_on_class_constant_rows(labels, data):
    c = int(labels.max()) + 1
    table = data.draw(hnp.arrays(np.float64, (c, 3), elements=st.floats(-1e3, 1e3)))
    inst = expand_semantic_labels(labels, table)
    again = expand_semantic_labels(labels, class_attributes_from_instances(inst, labels))
    # a mean of identical values can round in the last place
    np.testing.assert_allclose(again, inst, rtol=1e-14, atol=1e-12)


# -- class centers ----------------------------------------------------------------

@pytest.mark.parametrize("x, labels, centers, counts", [
    ([[0, 0], [2, 2]], [0, 0], [[1, 1]], [2]),
    ([[5]], [0], [[5]], [1]),
    ([[0], [2], [10]], [0, 0, 1], [[1], [10]], [2, 1]),
])
def test_compute_class_centers(x, labels, centers, counts):
    cc = compute_class_centers(x, labels)
    np.testing.assert_array_equal(cc.centers, centers)
    np.testing.assert_array_equal(cc.counts, counts)


def test_compute_class_centers_mismatch():
    with pytest.raises(DataError):
        compute_class_centers([[1.0], [2.0]], [0])


def test_expand_centers():
    cc = compute_class_centers([[1, 1], [1, 1]], [0, 0])
    np.testing.assert_array_equal(expand_centers(cc, [0, 0]), [[1, 1], [1, 1]])
    cc = compute_class_centers([[1], [9]], [0, 1])
    np.testing.assert_array_equal(expand_centers(cc, [1, 0, 1]), [[9], [1], [9]])
    with pytest.raises(DataError):
        expand_centers(cc, [0, 2])


@given(labels=labels_strategy, data=st.data())
def test_expanded_center_rows_are_class_means(labels, data):
    x = data.draw(hnp.arrays(np.float64, (labels.size, 2), elements=st.floats(-1e3, 1e3)))
    xbar = expand_centers(compute_class_centers(x, labels), labels)
    for i, y in enumerate(labels):
        np.testing.assert_allclose(xbar[i], x[labels == y].mean(axis=0), rtol=1e-12, atol=1e-9)


# -- synthetic generator -------------------------------------------------------------

def test_synthetic_is_deterministic():
    p = SyntheticParams(n_seen=40, n_unseen=20, d=12, m=3, k_info=4)
    a = generate_synthetic_zero_shot(p, 5)
    b = generate_synthetic_zero_shot(p, 5)
    for name in ("seen_x", "seen_labels", "seen_attrs", "unseen_x", "unseen_labels", "unseen_attrs",
                 "informative_features"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    c = generate_synthetic_zero_shot(p, 6)
    assert not np.array_equal(a.seen_x, c.seen_x)


def test_synthetic_all_informative():
    p = SyntheticParams(n_seen=10, n_unseen=10, d=4, m=2, k_info=4)
    ds = generate_synthetic_zero_shot(p, 0)
    np.testing.assert_array_equal(ds.informative_features, np.arange(4))


def test_synthetic_round_robin_and_shapes():
    p = SyntheticParams(n_seen=23, n_unseen=9, d=7, m=3, c_seen=4, c_unseen=3, k_info=2)
    ds = generate_synthetic_zero_shot(p, 1)
    np.testing.assert_array_equal(ds.seen_labels, np.arange(23) % 4)
    np.testing.assert_array_equal(ds.unseen_labels, np.arange(9) % 3)
    assert ds.seen_x.shape == (23, 7) and ds.unseen_x.shape == (9, 7)
    assert ds.seen_attrs.shape == (4, 3) and ds.unseen_attrs.shape == (3, 3)
    assert not np.allclose(ds.seen_attrs[:1], ds.unseen_attrs[:1])


def test_noiseless_informative_columns_are_linear_in_attributes():
    p = SyntheticParams(n_seen=50, n_unseen=30, d=10, m=4, k_info=3,
                        attr_noise_sd=0.0, feature_noise_sd=0.0)
    ds = generate_synthetic_zero_shot(p, 2)
    for x, labels, attrs in ((ds.seen_x, ds.seen_labels, ds.seen_attrs),
                             (ds.unseen_x, ds.unseen_labels, ds.unseen_attrs)):
        ys = expand_semantic_labels(labels, attrs)
        cols = x[:, ds.informative_features]
        coef, *_ = np.linalg.lstsq(ys, cols, rcond=None)
        resid = cols - ys @ coef
        assert np.max(np.abs(resid)) < 1e-10 * max(1.0, np.max(np.abs(cols)))
        # and the noise columns are not
        noise = np.setdiff1d(np.arange(p.d), ds.informative_features)
        coef, *_ = np.linalg.lstsq(ys, x[:, noise], rcond=None)
        assert np.linalg.norm(x[:, noise] - ys @ coef) > 1.0


def test_informative_columns_correlate_with_attributes():
    p = SyntheticParams(n_seen=200, n_unseen=50, d=20, m=5, k_info=5, feature_noise_sd=0.1)
    ds = generate_synthetic_zero_shot(p, 11)
    ys = expand_semantic_labels(ds.seen_labels, ds.seen_attrs)

    def r2(col):
        coef, *_ = np.linalg.lstsq(ys, col, rcond=None)
        return 1 - np.sum((col - ys @ coef) ** 2) / np.sum((col - col.mean()) ** 2)

    noise = np.setdiff1d(np.arange(p.d), ds.informative_features)
    assert min(r2(ds.seen_x[:, j]) for j in ds.informative_features) > 0.9
    assert max(r2(ds.seen_x[:, j]) for j in noise) < 0.2


@pytest.mark.parametrize("kwargs", [
    dict(k_info=11, d=10),
    dict(c_seen=1),
    dict(c_unseen=1),
    dict(n_seen=0),
    dict(feature_noise_sd=-1.0),
])
def test_synthetic_parameter_errors(kwargs):
    with pytest.raises(DataError):
        generate_synthetic_zero_shot(SyntheticParams(**kwargs), 0)


# -- writers ----------------------------------------------------------------------

@settings(max_examples=50)
@given(hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2, max_side=6),
                  elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_matrix_round_trip_is_bit_exact(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("rt") / "m.csv"
    write_matrix(path, values)
    back = load_matrix(path)
    assert back.shape == values.shape
    # -0.0 survives too
    assert back.tobytes() == values.astype(np.float64).tobytes()


def test_labels_and_report_round_trip(tmp_path):
    write_labels(tmp_path / "l.txt", [2, 0, 1])
    np.testing.assert_array_equal(load_labels(tmp_path / "l.txt"), [2, 0, 1])
    write_report(tmp_path / "r.txt", [3, 1, 0, 2], {"method": "semfs", "alpha": 1.0, "converged": True})
    ranking, header = read_report(tmp_path / "r.txt")
    np.testing.assert_array_equal(ranking, [3, 1, 0, 2])
    assert header == {"method": "semfs", "alpha": "1", "converged": "true"}


def test_export_synthetic_writes_manifest(tmp_path):
    p = SyntheticParams(n_seen=20, n_unseen=10, d=8, m=3, k_info=3)
    ds = generate_synthetic_zero_shot(p, 4)
    paths = export_synthetic(ds, tmp_path)
    assert len(paths) == 7
    man = read_key_values(tmp_path / "manifest.txt")
    assert man["seed"] == "4" and man["d"] == "8"
    assert [int(v) for v in man["informative_features"].split(",")] == list(ds.informative_features)
    np.testing.assert_array_equal(load_matrix(tmp_path / "seen_features.csv"), ds.seen_x)
    np.testing.assert_array_equal(load_attribute_table(tmp_path / "unseen_attrs.csv", 4), ds.unseen_attrs)
