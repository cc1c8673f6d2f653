import csv

import pytest

TOY = [
    # id, churn, predicted, revenue, retention, account length
    ("A", "Yes", 1, 100, 0.80, 120),
    ("B", "No", 1, 80, 0.90, 50),
    ("C", "Yes", 0, 120, 0.75, 180),
    ("D", "No", 0, 90, 0.85, 90),
    ("E", "Yes", 1, 150, 0.70, 200),
]


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


@pytest.fixture
def toy_files(tmp_path):
    customers = write_csv(
        tmp_path / "toy_customers.csv",
        ["customer_id", "monthly_revenue", "tenure_months", "churned", "retention"],
        [(cid, rev, ten, churn, r) for cid, churn, _, rev, r, ten in TOY],
    )
    labels = write_csv(tmp_path / "toy_labels.csv", ["customer_id", "label"],
                       [(cid, pred) for cid, _, pred, *_ in TOY])
    return customers, labels


@pytest.fixture
def toy_view(toy_files):
    from churn_eval import join_validate, load_customers, load_predictions

    customers, labels = toy_files
    data = load_customers(customers, {"retention": "retention"})
    return join_validate(data, load_predictions(labels, "toy"))


_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.skipped):
        status = "SKIP" if rep.skipped else ("PASS" if rep.passed else "FAIL")
        _ACCEPTANCE[number] = (status, title, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title, secs = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {status:4s} {title} ({secs:.2f}s)")
