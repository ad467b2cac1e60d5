"""Shared pytest fixtures: the worked-example algebras and a small limits profile."""

from __future__ import annotations

import pytest

from permutab.config import Limits
from permutab.paperlab import load_fixture


@pytest.fixture
def impl_x():
    return load_fixture("impl-X").payload


@pytest.fixture
def impl_y():
    return load_fixture("impl-Y").payload


@pytest.fixture
def impl_z():
    return load_fixture("impl-Z").payload


@pytest.fixture
def subtr_a():
    return load_fixture("subtr-A").payload


@pytest.fixture
def rel_r():
    return load_fixture("rel-R").payload


@pytest.fixture
def z2_group():
    return load_fixture("z2-group").payload


@pytest.fixture
def z2_subtr():
    return load_fixture("z2-subtr").payload


@pytest.fixture
def limits():
    return Limits()


@pytest.fixture(autouse=True)
def _no_cap_env(monkeypatch):
    monkeypatch.delenv("PERMUTAB_CAP", raising=False)
