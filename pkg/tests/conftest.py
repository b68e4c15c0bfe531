"""Shared fixtures: the bundled workflow files, parsed once per session."""

from __future__ import annotations

from importlib.resources import files

import pytest

from tascheck.speclang import ParsedSpec, parse_spec


def fixture_text(name: str) -> str:
    return (files("tascheck") / "fixtures" / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def fulfillment() -> ParsedSpec:
    return parse_spec(fixture_text("order_fulfillment.tas"))


@pytest.fixture(scope="session")
def fulfillment_faulty() -> ParsedSpec:
    return parse_spec(fixture_text("order_fulfillment_faulty.tas"))
