"""Published boundary RMSEs (x = 0, n = 500, 2000 replications) used as reproduction targets.

``{estimator: {design: rmse}}``; table 1 is for f, table 2 for f'.
theta = 4 is assumed for these values.
"""

from __future__ import annotations

REFERENCE_TABLE_1 = {
    "ls_cjm": {"F1": 0.067, "F2": 0.041, "F3": 0.081, "F4": 0.050},
    "ps1": {"F1": 0.065, "F2": 0.022, "F3": 0.068, "F4": 0.040},
    "ps2": {"F1": 0.064, "F2": 0.022, "F3": 0.063, "F4": 0.039},
    "ps3": {"F1": 0.062, "F2": 0.014, "F3": 0.063, "F4": 0.041},
    "kz": {"F1": 0.077, "F2": 0.025, "F3": 0.075, "F4": 0.042},
    "loader": {"F1": 0.064, "F2": 0.021, "F3": 0.064, "F4": 0.039},
}
REFERENCE_TABLE_2 = {
    "ls_cjm": {"F1": 0.145, "F2": 0.112, "F3": 0.394, "F4": 0.242},
    "ps1": {"F1": 0.172, "F2": 0.028, "F3": 0.436, "F4": 0.185},
    "ps2": {"F1": 0.169, "F2": 0.029, "F3": 0.400, "F4": 0.176},
    "ps3": {"F1": 0.197, "F2": 0.054, "F3": 0.408, "F4": 0.172},
    "kz": {"F1": 0.103, "F2": 0.153, "F3": 1.246, "F4": 0.486},
    "loader": {"F1": 0.172, "F2": 0.029, "F3": 0.403, "F4": 0.175},
}
