"""
Utility modules for the ASSIST library.
"""

from .helpers import as_dense_matrix, as_finite_vector, sgn, hash64, make_rng
from .converters import to_jsonable, format_number, format_row
