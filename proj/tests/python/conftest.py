import os
import sys

import pytest

BUILD_DIR = os.environ.get("SG_BUILD_DIR")
if BUILD_DIR:
    sys.path.insert(0, BUILD_DIR)

MODEL_DIR = os.environ.get("SG_MODEL_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "models"))


@pytest.fixture(scope="session")
def core():
    return pytest.importorskip("_core")


@pytest.fixture()
def model_text():
    def load(name):
        with open(os.path.join(MODEL_DIR, name), encoding="utf-8") as f:
            return f.read()

    return load
