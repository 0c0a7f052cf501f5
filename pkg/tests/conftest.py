import json
from pathlib import Path

import pytest

from sdoval import default_snapshot
from sdoval.annotation import parse_annotation
from sdoval.domain import parse_domain_spec
from sdoval.ruleengine import CallingCodeTable, FunctionRegistry
from sdoval.rulelang import parse_rule_set

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def snapshot():
    return default_snapshot()


@pytest.fixture(scope="session")
def release_bytes():
    return (FIXTURES / "schemaorg-release.jsonld").read_bytes()


@pytest.fixture(scope="session")
def lodging_spec_bytes():
    return (FIXTURES / "lodging.domain.json").read_bytes()


@pytest.fixture(scope="session")
def lodging_spec(lodging_spec_bytes):
    return parse_domain_spec(lodging_spec_bytes)


@pytest.fixture(scope="session")
def lodging_rules_bytes():
    return (FIXTURES / "lodging.rules.json").read_bytes()


@pytest.fixture(scope="session")
def lodging_rules(lodging_rules_bytes, lodging_spec, snapshot):
    return parse_rule_set(lodging_rules_bytes, lodging_spec, snapshot)


@pytest.fixture(scope="session")
def hotelroom_spec(snapshot):
    return parse_domain_spec((FIXTURES / "hotelroom.domain.json").read_bytes())


@pytest.fixture(scope="session")
def hotelroom_rules(hotelroom_spec, snapshot):
    return parse_rule_set(
        (FIXTURES / "hotelroom.rules.json").read_bytes(), hotelroom_spec, snapshot
    )


@pytest.fixture(scope="session")
def moosleite_bytes():
    return (FIXTURES / "moosleite.jsonld").read_bytes()


@pytest.fixture(scope="session")
def moosleite_doc(moosleite_bytes):
    return json.loads(moosleite_bytes)


@pytest.fixture(scope="session")
def moosleite_root(moosleite_bytes):
    return parse_annotation(moosleite_bytes)


@pytest.fixture(scope="session")
def calling_codes():
    return CallingCodeTable.default()


@pytest.fixture(scope="session")
def registry(calling_codes):
    return FunctionRegistry(calling_codes)


def with_currencies(doc: dict, currency: str = "EUR") -> dict:
    out = json.loads(json.dumps(doc))
    out["currenciesAccepted"] = currency
    return out


def with_fixed_phone(doc: dict) -> dict:
    out = with_currencies(doc)
    out["address"]["telephone"] = "+43 5285 62894"
    return out
