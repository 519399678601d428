import json

import pytest
from hypothesis import given, strategies as st

from certikit import (
    Certificate,
    Dataset,
    InputError,
    LabeledExample,
    WeightedExample,
    dataset,
    dpoint,
    flip,
    load_dataset,
    save_dataset,
    subsequence,
    vpoint,
    weighted_view,
)


def test_point_variants_exclusive():
    with pytest.raises(InputError):
        dpoint(-1)
    with pytest.raises(InputError):
        from certikit.domain import Point

        Point(discrete=1, vector=(1.0,))
    with pytest.raises(InputError):
        from certikit.domain import Point

        Point()


def test_label_validation():
    with pytest.raises(InputError):
        LabeledExample(dpoint(1), 0)
    with pytest.raises(InputError):
        WeightedExample(dpoint(1), 1, 0)
    assert flip(1) == -1 and flip(-1) == 1


def make_data(n=3):
    return dataset([(dpoint(i), -1) for i in range(n)])


def test_subsequence_basic():
    data = make_data(3)
    sub = subsequence(data, {0, 2})
    assert len(sub) == 2
    assert sub.source_indices == (0, 2)
    assert [ex.point.discrete for ex in sub] == [0, 2]

    assert len(subsequence(data, set())) == 0
    full = subsequence(data, range(3))
    assert full.examples == data.examples


def test_subsequence_out_of_range():
    with pytest.raises(InputError):
        subsequence(make_data(3), [3])


@given(st.data())
def test_subsequence_composes(data_strategy):
    n = data_strategy.draw(st.integers(2, 8))
    data = make_data(n)
    a = sorted(data_strategy.draw(st.sets(st.integers(0, n - 1), min_size=1)))
    inner = subsequence(data, a)
    b = sorted(
        data_strategy.draw(st.sets(st.integers(0, len(a) - 1), min_size=0))
    )
    left = subsequence(inner, b)
    right = subsequence(data, [a[i] for i in b])
    assert left == right


def test_weighted_view():
    data = make_data(3)
    plain = weighted_view(data)
    assert all(w.weight == 1 for w in plain)
    heavy = weighted_view(data, 0, 3)
    assert heavy[0].weight == 3 and heavy[1].weight == 1 and heavy[2].weight == 1
    # budget-1 star form: last element carries weight b+1 = 2
    star = weighted_view(make_data(5), 4, 2)
    assert [w.weight for w in star] == [1, 1, 1, 1, 2]
    with pytest.raises(InputError):
        weighted_view(data, 0, 0)


def test_dataset_csv_roundtrip_discrete(tmp_path):
    data = dataset([(dpoint(3), -1), (dpoint(1), 1), (dpoint(3), -1)])
    path = tmp_path / "d.csv"
    save_dataset(data, path)
    again = load_dataset(path)
    assert again.examples == data.examples
    assert path.read_text().splitlines()[0] == "point,label"


def test_dataset_csv_roundtrip_vector(tmp_path):
    data = dataset([(vpoint(0.1, -2.5), 1), (vpoint(1 / 3, 7e-17), -1)])
    path = tmp_path / "v.csv"
    save_dataset(data, path)
    again = load_dataset(path)
    assert again.examples == data.examples  # 17 significant digits round-trip


def test_certificate_json_roundtrip_discrete():
    data = make_data(4)
    cert = Certificate(data, (1, 3), 1, dpoint(9), 1, minimal_flag=True)
    obj = json.loads(cert.to_json())
    assert set(obj) == {"indices", "b", "test", "label", "minimal"}
    again = Certificate.from_json(cert.to_json(), data)
    assert again == cert


def test_certificate_json_roundtrip_vector():
    data = dataset([(vpoint(0.25, 1e-9), 1)])
    cert = Certificate(data, (0,), 0, vpoint(1 / 3, -7.25), -1)
    again = Certificate.from_json(cert.to_json(), data)
    assert again == cert  # bit-stable floats

    with pytest.raises(InputError):
        Certificate(data, (5,), 0, dpoint(1), 1)
