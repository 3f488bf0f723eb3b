"""scikit-learn style front end to the market model.

``RegulatoryMarket`` holds every model setting as a constructor
hyperparameter, so ``get_params``/``set_params``/``clone`` work and the
model drops into pipelines and parameter searches.  ``fit`` solves the
chain at the configured point; ``transform`` evaluates the chain at the
parameter points given as rows of ``X``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import analysis, egt
from .model import (
    IncentiveScheme,
    ModelParams,
    ModelVariant,
    WelfareConfig,
)

_PARAM_NAMES = (
    "b", "big_b", "w", "c", "s", "p_r", "p_l", "p_h", "phi", "g",
    "r_l", "r_h", "beta", "z_reg", "z_ai",
)


class RegulatoryMarket(TransformerMixin, BaseEstimator):
    """Rare-mutation dynamics of regulators and firms at one parameter point.

    Parameters
    ----------
    scheme : {"Vigilant", "Bounty", "Flat", "None"}
        Government incentive paid to regulators.
    regulator : {"market", "government"}
        ``"government"`` replaces the regulator population by a permanent
        high-quality regulator.
    features : tuple of str
        Names of the parameters held in the columns of ``X`` for
        :meth:`transform`.
    b, big_b, w, c, s, p_r, p_l, p_h, phi, g, r_l, r_h, beta, z_reg, z_ai
        Model parameters, see :class:`regmarket.model.ModelParams`.
    risk_model, au_vs_as_speedup, catchup_denominator, both_caught_full_punishment
        Payoff-table reading, see :class:`regmarket.model.ModelVariant`.
    externality_scale, include_regulator_surplus, include_government_cost
        Welfare accounting, see :class:`regmarket.model.WelfareConfig`.

    Attributes
    ----------
    transition_matrix_ : ndarray
    stationary_ : ndarray
        Long-run frequency of each state in ``states_``.
    states_ : list of str
    cell_ : CellResult
    spne_ : SpneOutcome or None
    n_features_in_ : int
    """

    def __init__(
        self,
        scheme="Vigilant",
        regulator="market",
        features=("s", "p_r"),
        b=4.0,
        big_b=100.0,
        w=1.0,
        c=1.0,
        s=1.5,
        p_r=0.6,
        p_l=0.0,
        p_h=0.6,
        phi=0.5,
        g=1.2,
        r_l=0.0,
        r_h=-1.0,
        beta=0.02,
        z_reg=50,
        z_ai=50,
        risk_model="Individual",
        au_vs_as_speedup=True,
        catchup_denominator="One",
        both_caught_full_punishment=False,
        externality_scale=0.0,
        include_regulator_surplus=False,
        include_government_cost=False,
    ):
        self.scheme = scheme
        self.regulator = regulator
        self.features = features
        self.b = b
        self.big_b = big_b
        self.w = w
        self.c = c
        self.s = s
        self.p_r = p_r
        self.p_l = p_l
        self.p_h = p_h
        self.phi = phi
        self.g = g
        self.r_l = r_l
        self.r_h = r_h
        self.beta = beta
        self.z_reg = z_reg
        self.z_ai = z_ai
        self.risk_model = risk_model
        self.au_vs_as_speedup = au_vs_as_speedup
        self.catchup_denominator = catchup_denominator
        self.both_caught_full_punishment = both_caught_full_punishment
        self.externality_scale = externality_scale
        self.include_regulator_surplus = include_regulator_surplus
        self.include_government_cost = include_government_cost

    def _model_params(self) -> ModelParams:
        return ModelParams(**{name: getattr(self, name) for name in _PARAM_NAMES})

    def _variant(self) -> ModelVariant:
        return ModelVariant(
            risk_model=self.risk_model,
            au_vs_as_speedup=self.au_vs_as_speedup,
            catchup_denominator=self.catchup_denominator,
            both_caught_full_punishment=self.both_caught_full_punishment,
        )

    def _welfare(self) -> WelfareConfig:
        return WelfareConfig(
            externality_scale=self.externality_scale,
            include_regulator_surplus=self.include_regulator_surplus,
            include_government_cost=self.include_government_cost,
        )

    def _evaluate(self, params):
        if self.regulator == "government":
            return analysis.government_variant(params, self._variant(), self._welfare())
        return analysis.evaluate_cell(
            params, self._variant(), self._welfare(), IncentiveScheme.parse(self.scheme)
        )

    def fit(self, X=None, y=None):
        """Solve the chain at the configured parameters.

        ``X`` and ``y`` are ignored apart from recording the feature count.
        """
        if self.regulator not in ("market", "government"):
            raise ValueError(f"regulator must be 'market' or 'government', got {self.regulator!r}")
        for name in self.features:
            if name not in _PARAM_NAMES:
                raise ValueError(f"unknown feature {name!r}")
        params = self._model_params()
        scheme = IncentiveScheme.parse(self.scheme)
        cell = self._evaluate(params)
        if self.regulator == "government":
            P = egt.build_transition_matrix(
                params, self._variant(), IncentiveScheme.NONE, analysis.GOVERNMENT_STATES
            )
            self.spne_ = None
        else:
            P = egt.build_transition_matrix(params, self._variant(), scheme)
            self.spne_ = analysis.spne(params, self._variant(), scheme)
        self.transition_matrix_ = P.matrix
        self.states_ = [str(st) for st in P.labels]
        self.stationary_ = cell.stationary.vector
        self.cell_ = cell
        self.n_features_in_ = len(self.features)
        return self

    def transform(self, X):
        """Summaries at each row of ``X``.

        Returns
        -------
        ndarray of shape (n_samples, 4)
            Columns are unsafe frequency, LQ frequency, HQ frequency and
            delta welfare, as named by :meth:`get_feature_names_out`.
        """
        check_is_fitted(self, "stationary_")
        X = check_array(X, dtype=np.float64, ensure_min_samples=1)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but {type(self).__name__} expects "
                f"{self.n_features_in_} ({', '.join(self.features)})"
            )
        base = self._model_params()
        out = np.empty((X.shape[0], len(analysis.METRICS)))
        for i, row in enumerate(X):
            params = base.with_(**dict(zip(self.features, row.tolist())))
            cell = self._evaluate(params)
            out[i] = [cell.metric(m) for m in analysis.METRICS]
        return out

    def get_feature_names_out(self, input_features=None):
        return np.asarray(analysis.METRICS, dtype=object)

    def score(self, X=None, y=None):
        """Long-run expected delta welfare at the fitted point."""
        check_is_fitted(self, "cell_")
        if X is None:
            return self.cell_.delta_welfare
        return float(np.mean(self.transform(X)[:, 3]))
