"""
Matrix Market export and import (array format for dense, coordinate for sparse)
"""
import logging
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.io import mmread, mmwrite

logger = logging.getLogger(__name__)

# 17 significant digits round-trip every double exactly
PRECISION = 17


def write_matrix_market(path: str | Path, matrix, comment: str = "") -> Path:
    """Dense arrays go out in array format, scipy sparse matrices in coordinate format"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = sp.coo_matrix(matrix) if sp.issparse(matrix) else np.asarray(matrix, dtype=float)
    mmwrite(str(path), data, comment=comment, field="real", precision=PRECISION)
    written = path if path.suffix == ".mtx" else path.with_name(path.name + ".mtx")
    logger.info("💾 Wrote %s", written)
    return written


def read_matrix_market(path: str | Path):
    """ndarray for array files, CSR for coordinate files"""
    data = mmread(str(path))
    return data.tocsr() if sp.issparse(data) else np.asarray(data, dtype=float)
