import pytest
from hypothesis import given, settings, HealthCheck
from hypothesis import strategies as st

from churn_eval import CustomerRecord, Dataset, join_validate, load_customers, load_predictions
from churn_eval.errors import (
    DuplicateCustomerId,
    EmptyDataset,
    KeyMismatch,
    MissingColumn,
    ParseError,
    ScoreOutOfRange,
)
from churn_eval.ingest import PredictionSet, Prediction, write_customers

from conftest import write_csv

SCHEMA = {"id": "id", "revenue": "rev", "tenure": "tenure", "churn": "churn"}


def test_load_three_rows(tmp_path):
    path = write_csv(tmp_path / "c.csv", ["id", "rev", "tenure", "churn"],
                     [("A", 100, 120, "Yes"), ("B", 80, 50, "No"), ("C", 120, 180, "Yes")])
    data = load_customers(path, SCHEMA)
    assert len(data) == 3
    assert data.ids == ["A", "B", "C"]
    a = data.records[0]
    assert a.monthly_revenue == 100 and a.tenure_months == 120 and a.churned
    assert not data.records[1].churned


def test_header_only_is_empty(tmp_path):
    path = write_csv(tmp_path / "c.csv", ["id", "rev", "tenure", "churn"], [])
    with pytest.raises(EmptyDataset):
        load_customers(path, SCHEMA)


def test_duplicate_id_named(tmp_path):
    path = write_csv(tmp_path / "c.csv", ["id", "rev", "tenure", "churn"],
                     [("A", 1, 1, "Yes"), ("A", 2, 2, "No")])
    with pytest.raises(DuplicateCustomerId, match="'A'") as err:
        load_customers(path, SCHEMA)
    assert err.value.customer_id == "A"


def test_missing_column(tmp_path):
    path = write_csv(tmp_path / "c.csv", ["id", "rev", "churn"], [("A", 1, "Yes")])
    with pytest.raises(MissingColumn, match="tenure"):
        load_customers(path, SCHEMA)


@pytest.mark.parametrize("rev,tenure,row_msg", [
    ("-5", "3", "revenue"),
    ("abc", "3", "revenue"),
    ("10", "-1", "negative"),
    ("10", "2.5", "integer"),
])
def test_parse_errors_carry_row(tmp_path, rev, tenure, row_msg):
    path = write_csv(tmp_path / "c.csv", ["id", "rev", "tenure", "churn"],
                     [("A", 1, 1, "No"), ("B", rev, tenure, "Yes")])
    with pytest.raises(ParseError, match=row_msg) as err:
        load_customers(path, SCHEMA)
    assert err.value.row == 3


def test_truthy_and_exclusion(tmp_path, caplog):
    path = write_csv(tmp_path / "maven.csv", ["id", "rev", "tenure", "status"],
                     [("A", 10, 3, "Churned"), ("B", 10, 1, "Joined"), ("C", 10, 20, "Stayed")])
    data = load_customers(path, {**SCHEMA, "churn": "status"}, truthy={"Churned"}, exclude={"Joined"})
    assert data.ids == ["A", "C"]
    assert [r.churned for r in data] == [True, False]
    assert "excluded 1 rows" in caplog.text


def test_quoted_fields_and_float_tenure(tmp_path):
    path = tmp_path / "q.csv"
    path.write_text('id,rev,tenure,churn\n"X, Inc",1.5,12.0,1\n', encoding="utf-8")
    data = load_customers(path, SCHEMA)
    assert data.records[0] == CustomerRecord("X, Inc", 1.5, 12, True)


def test_predictions_threshold(tmp_path):
    path = write_csv(tmp_path / "p.csv", ["customer_id", "score"], [("A", 0.9), ("B", 0.7), ("C", 0.2)])
    preds = load_predictions(path, "m", threshold=0.5)
    assert [preds.label_for(c) for c in "ABC"] == [True, True, False]
    assert preds.has_scores


def test_score_out_of_range(tmp_path):
    path = write_csv(tmp_path / "p.csv", ["customer_id", "score"], [("A", 1.3)])
    with pytest.raises(ScoreOutOfRange) as err:
        load_predictions(path, "m")
    assert err.value.row == 2


def test_labels_only(tmp_path):
    path = write_csv(tmp_path / "p.csv", ["customer_id", "label"], [("A", 1), ("B", 1), ("C", 0)])
    preds = load_predictions(path, "m")
    assert not preds.has_scores
    assert [preds.label_for(c) for c in "ABC"] == [True, True, False]


def test_explicit_label_beats_threshold(tmp_path):
    path = write_csv(tmp_path / "p.csv", ["customer_id", "score", "label"], [("A", 0.9, 0), ("B", 0.1, "")])
    preds = load_predictions(path, "m")
    assert preds.label_for("A") is False
    assert preds.label_for("B") is False


def test_row_without_score_or_label(tmp_path):
    path = write_csv(tmp_path / "p.csv", ["customer_id", "score", "label"], [("A", "", "")])
    with pytest.raises(ParseError, match="no score or label"):
        load_predictions(path, "m")


def test_predictions_need_score_or_label_column(tmp_path):
    path = write_csv(tmp_path / "p.csv", ["customer_id", "prob"], [("A", 0.3)])
    with pytest.raises(MissingColumn):
        load_predictions(path, "m")


def _dataset(ids):
    return Dataset(tuple(CustomerRecord(i, 10.0, 1, k % 2 == 0) for k, i in enumerate(ids)))


def _preds(ids):
    return PredictionSet("m", {i: Prediction(0.5, None) for i in ids})


def test_join_identical():
    view = join_validate(_dataset("ABCDE"), _preds("EDCBA"))
    assert len(view) == 5
    assert [r.customer_id for r in view.records] == list("ABCDE")


def test_join_missing_and_extra():
    with pytest.raises(KeyMismatch) as err:
        join_validate(_dataset("ABCDE"), _preds("ABCD"))
    assert err.value.missing == ["E"] and err.value.extra == []
    with pytest.raises(KeyMismatch) as err:
        join_validate(_dataset("ABCDE"), _preds("ABCDEZ"))
    assert err.value.extra == ["Z"] and err.value.missing == []


def test_join_lists_at_most_ten():
    ids = [f"c{i}" for i in range(30)]
    with pytest.raises(KeyMismatch) as err:
        join_validate(_dataset(ids), _preds([]))
    assert len(err.value.missing) == 10


records = st.builds(
    lambda rev, ten, churn, ret: (rev, ten, churn, ret),
    st.floats(0, 1e6, allow_nan=False),
    st.integers(0, 500),
    st.booleans(),
    st.one_of(st.none(), st.floats(0.001, 0.999)),
)


@settings(max_examples=50, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.lists(records, min_size=1, max_size=30))
def test_round_trip(tmp_path, rows):
    with_ret = rows[0][3] is not None
    data = Dataset(tuple(
        CustomerRecord(f"id{i}", rev, ten, churn, ret if with_ret else None)
        for i, (rev, ten, churn, ret) in enumerate(rows)
    ))
    if with_ret:
        data = Dataset(tuple(r if r.retention is not None else
                             CustomerRecord(r.customer_id, r.monthly_revenue, r.tenure_months,
                                            r.churned, 0.5) for r in data))
    path = tmp_path / "rt.csv"
    write_customers(data, path)
    schema = {"retention": "retention"} if with_ret else None
    assert load_customers(path, schema, name=data.name) == data
