import numpy as np
import pandas as pd
import pytest

from risknet.exceptions import (
    DataException,
    InvalidPriceException,
    MissingValueException,
    NonMonotonePeriodsException,
)
from risknet.ingest import PricePanel, cumulate_returns, log_returns, parse_price_csv, read_labels


def write(tmp_path, text: str, name: str = 'prices.csv'):
    path = tmp_path / name
    path.write_text(text, encoding='utf-8')
    return path


def test_parse_valid_panel(tmp_path):
    path = write(tmp_path, 'date,A,B\n2003-01-03,1.0,2.0\n2003-01-10,1.5,2.5\n2003-01-17,1.2,3.0\n')
    panel = parse_price_csv(path)
    assert panel.assets == ('A', 'B')
    assert panel.periods == ('2003-01-03', '2003-01-10', '2003-01-17')
    assert panel.shape == (3, 2)
    np.testing.assert_array_equal(panel.column('B'), [2.0, 2.5, 3.0])


def test_log_returns_drop_first_period(tmp_path):
    path = write(tmp_path, 'date,A,B\n2003-01-03,1.0,2.0\n2003-01-10,2.0,2.0\n')
    returns = log_returns(parse_price_csv(path))
    assert returns.periods == ('2003-01-10',)
    assert returns.returns[0, 0] == pytest.approx(np.log(2.0), abs=1e-15)
    assert returns.returns[0, 1] == 0.0


def test_cumulate_inverts_log_returns(tmp_path):
    path = write(tmp_path, 'date,A,B\n2003-01-03,10,20\n2003-01-10,11,19\n2003-01-17,12.5,21\n')
    panel = parse_price_csv(path)
    rebuilt = cumulate_returns(log_returns(panel), panel.prices[0], panel.periods[0])
    np.testing.assert_allclose(rebuilt.prices, panel.prices, rtol=1e-12)


def panel_of(prices) -> PricePanel:
    prices = np.asarray(prices, dtype=float).reshape(len(prices), -1)
    return PricePanel(
        assets=tuple(f'A{i}' for i in range(prices.shape[1])),
        periods=tuple(pd.date_range('2003-01-03', periods=len(prices), freq='W-FRI').strftime('%Y-%m-%d')),
        prices=prices,
    )


def test_log_returns_examples():
    np.testing.assert_allclose(log_returns(panel_of([1.0, np.e, np.e ** 2])).returns[:, 0], [1.0, 1.0], rtol=1e-15)
    assert log_returns(panel_of([100.0, 110.0])).returns[0, 0] == pytest.approx(np.log(1.1), abs=1e-15)


def test_log_returns_ignore_the_price_scale(rng):
    prices = np.exp(np.cumsum(rng.normal(0.0, 0.02, size=(60, 3)), axis=0))
    base = log_returns(panel_of(prices)).returns
    for scale in (1e-3, 7.5, 1e4):
        np.testing.assert_allclose(log_returns(panel_of(prices * scale)).returns, base, rtol=1e-9, atol=1e-14)


def test_missing_value_reports_row_and_column(tmp_path):
    path = write(tmp_path, 'date,A,B\n2003-01-03,1.0,2.0\n2003-01-10,,2.0\n')
    with pytest.raises(MissingValueException) as error:
        parse_price_csv(path)
    assert error.value.row == 3
    assert error.value.column == 'A'


@pytest.mark.parametrize('value', ['0', '-1.5'])
def test_non_positive_price(tmp_path, value):
    path = write(tmp_path, f'date,A,B\n2003-01-03,1.0,2.0\n2003-01-10,1.0,{value}\n')
    with pytest.raises(InvalidPriceException) as error:
        parse_price_csv(path)
    assert error.value.column == 'B'
    assert error.value.exit_code == 2


def test_non_numeric_price(tmp_path):
    path = write(tmp_path, 'date,A\n2003-01-03,abc\n')
    with pytest.raises(DataException, match='not a number'):
        parse_price_csv(path)


@pytest.mark.parametrize('row', ['2003-01-10,1.0', '2003-01-10,1.0,2.0,3.0'])
def test_ragged_rows(tmp_path, row):
    path = write(tmp_path, f'date,A,B\n2003-01-03,1.0,2.0\n{row}\n')
    with pytest.raises(DataException):
        parse_price_csv(path)


def test_periods_must_increase(tmp_path):
    path = write(tmp_path, 'date,A\n2003-01-10,1.0\n2003-01-03,1.1\n')
    with pytest.raises(NonMonotonePeriodsException):
        parse_price_csv(path)


def test_duplicate_assets(tmp_path):
    path = write(tmp_path, 'date,A,A\n2003-01-03,1.0,2.0\n')
    with pytest.raises(DataException, match='Duplicate'):
        parse_price_csv(path)


def test_missing_file(tmp_path):
    with pytest.raises(DataException):
        parse_price_csv(tmp_path / 'nope.csv')


def test_return_csv_is_read_back_exactly(tmp_path):
    path = write(tmp_path, 'date,A,B\n2003-01-03,1.0,2.0\n2003-01-10,1.1,1.9\n2003-01-17,1.3,2.2\n')
    returns = log_returns(parse_price_csv(path))
    frame = pd.read_csv(returns.to_csv(tmp_path / 'returns.csv'), index_col='period', dtype={'period': str})
    assert tuple(frame.index) == returns.periods
    assert tuple(frame.columns) == returns.assets
    np.testing.assert_array_equal(frame.to_numpy(), returns.returns)


def test_labels(tmp_path):
    path = write(tmp_path, 'asset,label\nA,Alpha Insurance\nB,Beta Re\n', name='labels.csv')
    assert read_labels(path) == {'A': 'Alpha Insurance', 'B': 'Beta Re'}
    assert read_labels(None) == {}
    with pytest.raises(DataException):
        read_labels(write(tmp_path, 'x,y\n1,2\n', name='bad.csv'))
