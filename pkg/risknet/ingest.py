from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from risknet.exceptions import (
    DataException,
    InvalidPriceException,
    MissingValueException,
    NonMonotonePeriodsException,
    RaggedRowException,
)
from risknet.logger import logger

FLOAT_FORMAT = '%.17g'


@dataclass(frozen=True)
class IngestOptions:
    encoding: str = 'utf-8'
    separator: str = ','


def _parse_periods(periods) -> pd.DatetimeIndex:
    try:
        return pd.DatetimeIndex(pd.to_datetime(list(periods), format='ISO8601'))
    except (ValueError, TypeError) as e:
        raise DataException(detail=f'Period labels should be ISO dates ({e})')


def _check_periods(periods: tuple[str, ...]) -> None:
    parsed = _parse_periods(periods)
    for row in range(1, len(parsed)):
        if parsed[row] <= parsed[row - 1]:
            raise NonMonotonePeriodsException(row=row + 2, previous=periods[row - 1], current=periods[row])


def _check_assets(assets: tuple[str, ...]) -> None:
    seen = set()
    for asset in assets:
        if not asset:
            raise DataException(detail='Asset identifiers should not be empty')
        if asset in seen:
            raise DataException(detail=f"Duplicate asset identifier '{asset}'")
        seen.add(asset)


@dataclass(frozen=True)
class PricePanel:
    assets: tuple[str, ...]
    periods: tuple[str, ...]
    prices: np.ndarray

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        if prices.ndim != 2 or prices.shape != (len(self.periods), len(self.assets)):
            raise DataException(
                detail=f'Price matrix shape {prices.shape} does not match {len(self.periods)} periods x {len(self.assets)} assets'
            )
        _check_assets(self.assets)
        _check_periods(self.periods)
        bad = np.argwhere(~(prices > 0))
        if len(bad):
            row, column = bad[0]
            raise InvalidPriceException(row=int(row) + 2, column=self.assets[column], value=float(prices[row, column]))
        prices.setflags(write=False)
        object.__setattr__(self, 'prices', prices)

    @property
    def shape(self) -> tuple[int, int]:
        return self.prices.shape

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.prices, index=pd.Index(self.periods, name='period'), columns=list(self.assets))

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        self.to_frame().to_csv(path, float_format=FLOAT_FORMAT, lineterminator='\n')
        return path

    def column(self, asset: str) -> np.ndarray:
        return self.prices[:, self.assets.index(asset)]


@dataclass(frozen=True)
class ReturnPanel:
    assets: tuple[str, ...]
    periods: tuple[str, ...]
    returns: np.ndarray

    def __post_init__(self):
        returns = np.asarray(self.returns, dtype=float)
        if returns.shape != (len(self.periods), len(self.assets)):
            raise DataException(detail=f'Return matrix shape {returns.shape} does not match its labels')
        if not np.all(np.isfinite(returns)):
            raise DataException(detail='Returns must be finite')
        returns.setflags(write=False)
        object.__setattr__(self, 'returns', returns)

    def column(self, asset: str) -> np.ndarray:
        return self.returns[:, self.assets.index(asset)]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.returns, index=pd.Index(self.periods, name='period'), columns=list(self.assets))

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        self.to_frame().to_csv(path, float_format=FLOAT_FORMAT, lineterminator='\n')
        return path


def parse_price_csv(path: str | Path, config: IngestOptions = IngestOptions()) -> PricePanel:
    """
    Read a complete price panel: a header row, the period label in the first
    column and one positive price per asset column. Rows are reported by their
    line number in the file (the header is line 1).
    """
    path = Path(path)
    if not path.is_file():
        raise DataException(detail=f'"{path}" is not a file')

    def reject_long_row(fields: list[str]):
        raise RaggedRowException(row=-1, expected=-1, found=len(fields))

    try:
        raw = pd.read_csv(
            path,
            sep=config.separator,
            header=None,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            encoding=config.encoding,
            engine='python',
            on_bad_lines=reject_long_row,
            skip_blank_lines=True,
        )
    except RaggedRowException:
        raise DataException(detail=f'"{path}" has a row with more fields than the header')
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DataException(detail=f'Could not parse "{path}": {e}')

    if len(raw) < 2 or raw.shape[1] < 2:
        raise DataException(detail=f'"{path}" needs a header, at least one data row and one asset column')

    header = [str(h).strip() for h in raw.iloc[0]]
    assets = tuple(header[1:])
    body = raw.iloc[1:].reset_index(drop=True)
    width = len(header)

    prices = np.empty((len(body), width - 1))
    for row_index, row in enumerate(body.itertuples(index=False)):
        line = row_index + 2
        values = list(row)
        present = [v for v in values if isinstance(v, str)]
        if len(present) != width:
            raise RaggedRowException(row=line, expected=width, found=len(present))
        for column_index, cell in enumerate(values[1:]):
            cell = cell.strip()
            if cell == '':
                raise MissingValueException(row=line, column=assets[column_index])
            try:
                value = float(cell)
            except ValueError:
                raise DataException(detail=f"Price is not a number (row {line}, column '{assets[column_index]}' -> {cell!r})")
            if not np.isfinite(value) or value <= 0:
                raise InvalidPriceException(row=line, column=assets[column_index], value=cell)
            prices[row_index, column_index] = value

    periods = tuple(str(v).strip() for v in body.iloc[:, 0])
    panel = PricePanel(assets=assets, periods=periods, prices=prices)
    logger.debug(f'Parsed {path}: {len(periods)} periods x {len(assets)} assets')
    return panel


def log_returns(panel: PricePanel) -> ReturnPanel:
    prices = panel.prices
    return ReturnPanel(
        assets=panel.assets,
        periods=panel.periods[1:],
        returns=np.log(prices[1:] / prices[:-1]),
    )


def cumulate_returns(returns: ReturnPanel, first_prices, first_period: str) -> PricePanel:
    """Inverse of log_returns given the first price row."""
    first_prices = np.asarray(first_prices, dtype=float)
    growth = np.exp(np.cumsum(returns.returns, axis=0))
    prices = np.vstack([first_prices, first_prices * growth])
    return PricePanel(assets=returns.assets, periods=(first_period, *returns.periods), prices=prices)


def read_labels(path: str | Path | None) -> dict[str, str]:
    """Optional asset -> display label table (columns: asset,label)."""
    if path is None:
        return {}
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    if not {'asset', 'label'} <= set(frame.columns):
        raise DataException(detail=f'"{path}" should have the columns asset,label')
    return dict(zip(frame['asset'], frame['label']))
