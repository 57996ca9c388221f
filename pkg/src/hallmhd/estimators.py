"""scikit-learn style wrappers.

:class:`NormFeatures` turns batches of periodic fields into rows of norm
features, so it composes with pipelines and grid searches.
:class:`HallMHDSimulator` wraps a solver run behind ``fit``/``predict``;
the physics modules do not depend on this layer.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_field_batch, check_grid, check_positive, check_state_array
from .littlewood_paley import bmo_proxy, build_ladder, besov_norm, sobolev_norm_hom, sobolev_norm_inhom
from .monitor import CriterionConfig, DiagnosticsLedger
from .solver import Regime, SolverState, StepControl, run
from .spectral import SpectralField, leray_project, lp_norm, to_physical, to_spectral


class NormFeatures(BaseEstimator, TransformerMixin):
    """Besov, Sobolev, BMO and Lebesgue norms of each input field."""

    def __init__(
        self,
        n=16,
        box_length=2 * math.pi,
        dims=3,
        besov_orders=(0.5, 1.5),
        sobolev_orders=(1.5,),
        hm_order=3,
        lp_orders=(2.0, math.inf),
        include_bmo=True,
    ):
        self.n = n
        self.box_length = box_length
        self.dims = dims
        self.besov_orders = besov_orders
        self.sobolev_orders = sobolev_orders
        self.hm_order = hm_order
        self.lp_orders = lp_orders
        self.include_bmo = include_bmo

    def fit(self, X, y=None):
        self.grid_ = check_grid(self.n, self.box_length, self.dims)
        for p in self.lp_orders:
            if not p >= 1:
                raise ValueError(f"L^p order must be >= 1, got {p}")
        X = check_field_batch(X, self.grid_)
        self.n_components_ = X.shape[1]
        self.ladder_ = build_ladder(self.grid_)
        self.feature_names_ = self._names()
        self.n_features_in_ = int(np.prod(X.shape[1:]))
        return self

    def _names(self):
        names = [f"besov_2_1_s{s:g}" for s in self.besov_orders]
        names += [f"sobolev_hom_s{s:g}" for s in self.sobolev_orders]
        names.append(f"sobolev_inhom_m{self.hm_order}")
        if self.include_bmo:
            names.append("bmo_proxy")
        names += [f"lp_p{'inf' if math.isinf(p) else f'{p:g}'}" for p in self.lp_orders]
        return names

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "feature_names_")
        return np.array(self.feature_names_, dtype=object)

    def _row(self, f: SpectralField) -> list[float]:
        row = [besov_norm(f, s) for s in self.besov_orders]
        row += [sobolev_norm_hom(f, s) for s in self.sobolev_orders]
        row.append(sobolev_norm_inhom(f, self.hm_order))
        if self.include_bmo:
            row.append(bmo_proxy(f))
        row += [lp_norm(f, p) for p in self.lp_orders]
        return row

    def transform(self, X):
        check_is_fitted(self, "grid_")
        X = check_field_batch(X, self.grid_, self.n_components_)
        return np.array([self._row(to_spectral(x, self.grid_)) for x in X])


class HallMHDSimulator(BaseEstimator):
    """Evolve a ``(u, B)`` pair given as physical samples of shape ``(2, 3, *grid)``.

    ``fit`` runs the solver from ``X`` and keeps ``outcome_`` and ``ledger_``;
    ``predict`` returns the final state in the same layout.  Inputs are
    Leray-projected before the run.
    """

    def __init__(
        self,
        n=16,
        box_length=2 * math.pi,
        regime="full3d",
        hall_coefficient=1.0,
        dt=1e-3,
        t_end=0.1,
        cfl_safety=1.0,
        sample_cadence=10,
        hm_order=3,
        max_hm_norm=math.inf,
        spectral_tail_fraction=0.01,
    ):
        self.n = n
        self.box_length = box_length
        self.regime = regime
        self.hall_coefficient = hall_coefficient
        self.dt = dt
        self.t_end = t_end
        self.cfl_safety = cfl_safety
        self.sample_cadence = sample_cadence
        self.hm_order = hm_order
        self.max_hm_norm = max_hm_norm
        self.spectral_tail_fraction = spectral_tail_fraction

    def _setup(self):
        regime = Regime.parse(self.regime)
        dims = 2 if regime == Regime.TWO_AND_HALF_D else 3
        grid = check_grid(self.n, self.box_length, dims)
        if self.hall_coefficient < 0:
            raise ValueError("hall_coefficient must be nonnegative")
        ctl = StepControl(
            dt=check_positive("dt", self.dt),
            t_end=check_positive("t_end", self.t_end),
            cfl_safety=self.cfl_safety,
            max_hm_norm=check_positive("max_hm_norm", self.max_hm_norm, allow_inf=True),
            spectral_tail_fraction=self.spectral_tail_fraction,
            hm_order=self.hm_order,
        )
        return regime, grid, ctl

    def _simulate(self, X):
        regime, grid, ctl = self._setup()
        arr = check_state_array(X, grid)
        u = leray_project(to_spectral(arr[0], grid))
        b = leray_project(to_spectral(arr[1], grid))
        if regime == Regime.HALL_ONLY:
            u = u * 0.0
        state = SolverState(0.0, u, b, regime, float(self.hall_coefficient))
        ledger = DiagnosticsLedger(CriterionConfig(sample_cadence=self.sample_cadence, hm_order=self.hm_order))
        outcome = run(state, ctl, [(self.sample_cadence, ledger.hook())])
        return outcome, ledger

    def fit(self, X, y=None):
        self.outcome_, self.ledger_ = self._simulate(X)
        self.grid_ = self.outcome_.state.grid
        return self

    def predict(self, X=None):
        """Final ``(u, B)`` samples; ``X=None`` returns the fitted run's final state."""
        if X is None:
            check_is_fitted(self, "outcome_")
            state = self.outcome_.state
        else:
            state = self._simulate(X)[0].state
        return np.stack([to_physical(state.u), to_physical(state.b)])

    @property
    def termination_(self) -> str:
        check_is_fitted(self, "outcome_")
        return self.outcome_.status.value
