"""sdoval: domain-specific validation of schema.org annotations."""

from importlib import resources

from sdoval.vocabulary import (
    VocabularySnapshot,
    import_snapshot,
    load_snapshot,
    save_snapshot,
)

__version__ = "0.1.0"


def default_snapshot_path():
    """Path of the vocabulary snapshot bundled with the distribution."""
    return resources.files("sdoval").joinpath("data/schemaorg-snapshot.json")


def default_calling_codes_path():
    """Path of the bundled country calling-code table."""
    return resources.files("sdoval").joinpath("data/calling-codes.json")


def default_snapshot() -> VocabularySnapshot:
    return VocabularySnapshot.from_json_bytes(default_snapshot_path().read_bytes())
