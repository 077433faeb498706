"""perfsentry: change-point detection and triage for CI benchmark results.

Ingests per-task benchmark bundles, detects distributional shifts per
series with a divisive energy-statistic search, attributes them to suspect
commit ranges, and drives an acknowledge/hide triage workflow over an HTTP
API and companion web UI.
"""

__version__ = "0.1.0"
