"""Input checks for the estimator front end."""

import numpy as np
from sklearn.utils import check_array

from .exceptions import ConfigurationError, ShapeError
from .sources import SourceSpec, make_source


def check_points(X, n):
    """Return ``X`` as a finite float array of shape ``(m, n)``."""
    X = check_array(X, dtype=np.float64, ensure_2d=True, ensure_all_finite=True)
    if X.shape[1] != n:
        raise ShapeError(f"expected points with {n} coordinates, got {X.shape[1]}")
    return X


def check_source(source, n, r1, r2):
    """Accept a :class:`SourceSpec`, a catalog kind string, or ``{"kind", "params"}``."""
    if isinstance(source, str):
        source = {"kind": source}
    if isinstance(source, dict):
        return make_source(source.get("kind"), n, r1, r2, source.get("params"))
    if not isinstance(source, SourceSpec):
        raise ConfigurationError(f"unsupported source type {type(source).__name__}")
    if (source.n, source.r1, source.r2) != (n, float(r1), float(r2)):
        raise ConfigurationError(
            f"source is defined on (n={source.n}, r1={source.r1}, r2={source.r2}), "
            f"solver expects (n={n}, r1={r1}, r2={r2})"
        )
    return source
