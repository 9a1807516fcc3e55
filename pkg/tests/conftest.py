from pathlib import Path

import pytest

from riccilike.curvature import curvature_bundle
from riccilike.manifold_input import load_manifest

MANIFESTS = Path(__file__).resolve().parent.parent / "manifests"


def manifest_path(name: str) -> Path:
    return MANIFESTS / f"{name}.yaml"


def load(name: str, **params):
    return load_manifest(manifest_path(name), params or None)


def loaded(name: str, **params):
    spec = load(name, **params)
    return spec, curvature_bundle(spec)


@pytest.fixture(scope="session")
def ex1():
    return loaded("example1")


@pytest.fixture(scope="session")
def ex2():
    return loaded("example2")


@pytest.fixture(scope="session")
def ex3():
    return loaded("example3")


@pytest.fixture(scope="session")
def flat():
    return loaded("flat")
