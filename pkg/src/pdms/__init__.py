"""Secure erasure codes with partial decodability over prime fields."""

from .audit import AuditReport, Budgets, classify
from .codec import (Share, access_set, decode_file, decode_full, decode_group, encode_file,
                    encode_stripe, partial_decode_vector)
from .construction import (CodingScheme, SchemeParams, build_scheme, load_scheme,
                           step2_zero_topleft, step3_blockdiag, validate_params)
from .gf import Field, OsSource, SeededSource
from .kernels import BACKEND_NAME
from .linalg import FqMatrix

__version__ = "0.1.0"
