"""Selects the compiled string kernel when available.

Set ``SHOTNOISE_PURE_PYTHON=1`` to force the numpy implementation.
"""
import os

from . import _strings_py

python_string_variance = _strings_py.string_variance

compiled_string_variance = None
if not os.environ.get("SHOTNOISE_PURE_PYTHON"):
    try:
        from ._strings import string_variance as compiled_string_variance
    except ImportError:  # extension not built
        compiled_string_variance = None

if compiled_string_variance is not None:
    string_variance = compiled_string_variance
    BACKEND = "cython"
else:
    string_variance = python_string_variance
    BACKEND = "python"
