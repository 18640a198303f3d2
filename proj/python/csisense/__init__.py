# SPDX-License-Identifier: Apache-2.0
#
# Copyright 2026 The csisense Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Passive target sensing over multistatic CSI."""

from ._csisense import (
    CsisenseError,
    Dataset,
    Model,
    Scenario,
    baseline_errors,
    coverage_map,
    detection_accuracy,
    error_summary,
    gen_binned_set,
    gen_resolution_set,
    in_shadow,
    load_dataset,
    load_model,
    load_scenario,
    positioning_errors,
    preset,
    resolution_curve,
    scenario_from_json,
    simulate_frame,
    split,
    train,
)

__all__ = [
    "CsisenseError",
    "Dataset",
    "Model",
    "Scenario",
    "baseline_errors",
    "coverage_map",
    "detection_accuracy",
    "error_summary",
    "gen_binned_set",
    "gen_resolution_set",
    "in_shadow",
    "load_dataset",
    "load_model",
    "load_scenario",
    "positioning_errors",
    "preset",
    "resolution_curve",
    "scenario_from_json",
    "simulate_frame",
    "split",
    "train",
]

__version__ = "0.1.0"
