# Copyright 2026 The inline-tomo Authors
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
"""Python bindings for the inline_tomo C++ library."""

from ._core import (
    Coupler,
    IllConditioned,
    InvalidArgument,
    Layout,
    NumericalFailure,
    analysis_state,
    bloch,
    build_B,
    combinations,
    condition_number,
    dim_params,
    fidelity,
    fluorescence_windows,
    gamma,
    noon,
    optimize_dz,
    optimize_free,
    product,
    reconstruct,
    sample_counts,
    single_photon_propagator,
    sweep_beta,
    transfer_matrix,
)

__all__ = [
    "Coupler",
    "IllConditioned",
    "InvalidArgument",
    "Layout",
    "NumericalFailure",
    "analysis_state",
    "bloch",
    "build_B",
    "combinations",
    "condition_number",
    "dim_params",
    "fidelity",
    "fluorescence_windows",
    "gamma",
    "noon",
    "optimize_dz",
    "optimize_free",
    "product",
    "reconstruct",
    "sample_counts",
    "single_photon_propagator",
    "sweep_beta",
    "transfer_matrix",
]
