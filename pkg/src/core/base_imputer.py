"""
Base column imputer abstraction - all covariate imputation methods inherit from this
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, Optional, Sequence

import numpy as np

from .types import CovariateMethod

if TYPE_CHECKING:
    from src.numerics.sampling import RngStream


@dataclass
class ColumnImputation:
    """
    Standardized result from any column imputer
    """

    column: str
    values: np.ndarray
    n_imputed: int
    method: CovariateMethod
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def imputed_fraction(self) -> float:
        """Share of cells that were filled"""
        return self.n_imputed / len(self.values) if len(self.values) else 0.0


class BaseColumnImputer(ABC):
    """
    Abstract base class for univariate covariate imputers

    The FCS loop hands every imputer the observed rows of one column, the
    predictor rows for observed and missing cells, and an RNG stream.
    Subclasses return one draw per missing cell.
    """

    def __init__(self, options: Optional[Dict[str, Any]] = None):
        """
        Initialize imputer with optional settings

        Args:
            options: Overrides for the method's default options
        """
        self.options = self._get_default_options()
        if options:
            self.options.update(options)

    @abstractmethod
    def draw(
        self,
        y_observed: np.ndarray,
        x_observed: np.ndarray,
        x_missing: np.ndarray,
        rng: "RngStream",
        names: Optional[Sequence[str]] = None,
    ) -> np.ndarray:
        """
        Draw imputations for the missing cells of one column

        Args:
            y_observed: Observed values of the column being imputed
            x_observed: Predictor rows (intercept included) for observed cells
            x_missing: Predictor rows (intercept included) for missing cells
            rng: Random stream owned by the calling imputation
            names: Predictor column names, for error messages

        Returns:
            Array with one imputed value per row of x_missing
        """

    @abstractmethod
    def _get_default_options(self) -> Dict[str, Any]:
        """Default options for this method"""

    @property
    @abstractmethod
    def method(self) -> CovariateMethod:
        """The method tag this imputer implements"""

    def impute(
        self,
        column: str,
        values: np.ndarray,
        missing: np.ndarray,
        predictors: np.ndarray,
        rng: "RngStream",
        predictor_names: Optional[Sequence[str]] = None,
    ) -> ColumnImputation:
        """
        Fill the missing cells of a column, leaving observed cells untouched

        Args:
            column: Column name, for reporting
            values: Current column values (missing cells hold the previous fill)
            missing: Boolean mask of originally missing cells
            predictors: Predictor matrix with intercept, one row per cell
            rng: Random stream
            predictor_names: Names of the predictor columns

        Returns:
            ColumnImputation with the completed column
        """
        filled = np.array(values, dtype=float, copy=True)
        n_missing = int(missing.sum())
        if n_missing:
            observed = ~missing
            filled[missing] = self.draw(
                filled[observed],
                predictors[observed],
                predictors[missing],
                rng,
                predictor_names,
            )
        return ColumnImputation(
            column=column, values=filled, n_imputed=n_missing, method=self.method
        )

    def get_options(self) -> Dict[str, Any]:
        """Get current options"""
        return self.options.copy()
