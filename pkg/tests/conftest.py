import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import phdim.estimators
import phdim.mst
import phdim.persistence
from phdim import _fallback
from phdim._backend import COMPILED

BACKENDS = ["python"] + (["cython"] if COMPILED else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    if request.param == "python":
        for mod in (phdim.mst, phdim.persistence, phdim.estimators):
            monkeypatch.setattr(mod, "kernels", _fallback)
    return request.param
