# Copyright 2026 The LCA Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Likelihood component analysis."""

from ._lca import (
    ConfigError,
    DimensionError,
    InputError,
    LcaError,
    dfastica,
    fit_logis_lca,
    fit_spline_lca,
    pca_infomax,
    pmse,
    simulate,
    simulate_spatiotemporal,
    snr,
    whiten,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "InputError",
    "LcaError",
    "dfastica",
    "fit_logis_lca",
    "fit_spline_lca",
    "pca_infomax",
    "pmse",
    "simulate",
    "simulate_spatiotemporal",
    "snr",
    "whiten",
]
