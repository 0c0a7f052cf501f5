import json
import logging

import pytest

from sdoval.vocabulary import (
    DanglingReference,
    MalformedRelease,
    UnknownClass,
    VocabularySnapshot,
    import_snapshot,
)


def make_release(classes=(), datatypes=(), properties=()):
    """Helper building a minimal release document in the official shape."""
    graph = []
    for name, parents in datatypes:
        entry = {"@id": f"schema:{name}", "rdfs:label": name}
        entry["@type"] = ["rdfs:Class", "schema:DataType"] if not parents else "rdfs:Class"
        if parents:
            entry["rdfs:subClassOf"] = [{"@id": f"schema:{p}"} for p in parents]
        graph.append(entry)
    for name, parents in classes:
        entry = {"@id": f"schema:{name}", "@type": "rdfs:Class", "rdfs:label": name}
        if parents:
            entry["rdfs:subClassOf"] = [{"@id": f"schema:{p}"} for p in parents]
        graph.append(entry)
    for name, domains, ranges in properties:
        graph.append(
            {
                "@id": f"schema:{name}",
                "@type": "rdf:Property",
                "rdfs:label": name,
                "schema:domainIncludes": [{"@id": f"schema:{d}"} for d in domains],
                "schema:rangeIncludes": [{"@id": f"schema:{r}"} for r in ranges],
            }
        )
    return json.dumps({"@context": {}, "@graph": graph}).encode()


class TestImport:
    def test_three_level_chain_transitivity(self):
        release = make_release(
            classes=[("Thing", []), ("LocalBusiness", ["Thing"]),
                     ("LodgingBusiness", ["LocalBusiness"]), ("Hotel", ["LodgingBusiness"])],
            datatypes=[("Text", [])],
            properties=[("name", ["Thing"], ["Text"])],
        )
        snap = import_snapshot(release)
        assert "LocalBusiness" in snap.ancestors("Hotel")

    def test_telephone_domains_match_release_file(self, release_bytes, snapshot):
        # independent read of the pinned release: collect telephone's domainIncludes
        doc = json.loads(release_bytes)
        entry = next(
            e for e in doc["@graph"] if e["@id"] == "schema:telephone"
        )
        declared = {d["@id"].split(":")[1] for d in entry["schema:domainIncludes"]}
        assert "ContactPoint" in declared
        assert set(snapshot.properties["telephone"].domains) == declared

    def test_missing_parent_is_dangling(self):
        release = make_release(
            classes=[("Thing", []), ("Hotel", ["LodgingBusiness"])],
            datatypes=[("Text", [])],
            properties=[("name", ["Thing"], ["Text"])],
        )
        with pytest.raises(DanglingReference) as err:
            import_snapshot(release)
        assert "LodgingBusiness" in str(err.value)

    def test_all_dangling_problems_reported(self):
        release = make_release(
            classes=[("Thing", []), ("A", ["Missing1"]), ("B", ["Missing2"])],
            datatypes=[("Text", [])],
            properties=[("p", ["Nowhere"], ["Text"])],
        )
        with pytest.raises(DanglingReference) as err:
            import_snapshot(release)
        assert len(err.value.problems) == 3

    def test_not_json_is_malformed(self):
        with pytest.raises(MalformedRelease):
            import_snapshot(b"this is not json")

    def test_missing_graph_is_malformed(self):
        with pytest.raises(MalformedRelease):
            import_snapshot(b'{"classes": []}')

    def test_superseded_and_pending_dropped(self, snapshot):
        assert "ingredients" not in snapshot.properties
        assert "numberOfBathroomsTotal" not in snapshot.properties

    def test_unknown_datatype_maps_to_text_with_warning(self, caplog, release_bytes):
        with caplog.at_level(logging.WARNING, logger="sdoval.vocabulary"):
            snap = import_snapshot(release_bytes)
        assert "PronounceableText" in caplog.text
        assert snap.properties["caption"].ranges == ("Text",)

    def test_deterministic_same_bytes_same_snapshot(self, release_bytes):
        first = import_snapshot(release_bytes)
        second = import_snapshot(release_bytes)
        assert first.to_json_bytes() == second.to_json_bytes()

    def test_cycle_rejected(self):
        release = make_release(
            classes=[("A", ["B"]), ("B", ["A"])],
            datatypes=[("Text", [])],
            properties=[("p", ["A"], ["Text"])],
        )
        with pytest.raises(MalformedRelease) as err:
            import_snapshot(release)
        assert "cycle" in str(err.value)


class TestAncestors:
    def test_root_has_none(self, snapshot):
        assert snapshot.ancestors("Thing") == ()

    def test_hotel_lineage_hand_derived(self, snapshot):
        # walked by hand over the pinned release subclass links
        assert snapshot.ancestors("Hotel") == (
            "LodgingBusiness", "LocalBusiness", "Organization", "Place", "Thing",
        )

    def test_simple_chain(self):
        release = make_release(
            classes=[("Z", []), ("Y", ["Z"]), ("X", ["Y"])],
            datatypes=[("Text", [])],
            properties=[("p", ["Z"], ["Text"])],
        )
        snap = import_snapshot(release)
        assert snap.ancestors("X") == ("Y", "Z")

    def test_unknown_class(self, snapshot):
        with pytest.raises(UnknownClass):
            snapshot.ancestors("NoSuchClass")

    def test_strict_partial_order(self, snapshot):
        for name in snapshot.classes:
            ancestors = snapshot.ancestors(name)
            assert name not in ancestors
            for ancestor in ancestors:
                for higher in snapshot.ancestors(ancestor):
                    assert higher in ancestors


class TestPropertiesOf:
    def test_event_inherits_thing(self, snapshot):
        thing = snapshot.property_names_of("Thing")
        event = snapshot.property_names_of("Event")
        assert thing <= event

    def test_class_with_no_properties_and_no_parents(self):
        release = make_release(
            classes=[("Thing", []), ("Lonely", [])],
            datatypes=[("Text", [])],
            properties=[("name", ["Thing"], ["Text"])],
        )
        snap = import_snapshot(release)
        assert snap.properties_of("Lonely") == ()

    def test_frozen_counts_regression(self, snapshot):
        # recorded once from the pinned snapshot; see also the independent
        # recomputation below
        assert len(snapshot.properties_of("Event")) == 38
        assert len(snapshot.properties_of("Organization")) == 50

    def test_counts_recomputed_independently(self):
        from sdoval import default_snapshot_path

        doc = json.loads(default_snapshot_path().read_bytes())

        def supers(name):
            out, work = set(), [name]
            while work:
                for parent in doc["classes"][work.pop()].get("parents", []):
                    if parent not in out:
                        out.add(parent)
                        work.append(parent)
            return out

        def count(name):
            lineage = {name} | supers(name)
            return sum(
                1
                for entry in doc["properties"].values()
                if lineage & set(entry["domains"])
            )

        assert count("Event") == 38
        assert count("Organization") == 50
        assert count("Thing") == 12

    def test_monotone_inheritance(self, snapshot):
        for name, cls in snapshot.classes.items():
            mine = snapshot.property_names_of(name)
            for parent in cls.parents:
                assert snapshot.property_names_of(parent) <= mine

    def test_query_results_resolve(self, snapshot):
        for name in snapshot.classes:
            for prop in snapshot.properties_of(name):
                assert prop.name in snapshot.properties
                for rng in prop.ranges:
                    assert snapshot.has_class(rng) or snapshot.is_datatype(rng)


class TestSubclassOf:
    def test_reflexive(self, snapshot):
        assert snapshot.is_subclass_of("Hotel", "Hotel")

    def test_reserve_action_under_action(self, snapshot):
        assert snapshot.is_subclass_of("ReserveAction", "Action")

    def test_direction(self, snapshot):
        assert not snapshot.is_subclass_of("Thing", "Hotel")

    def test_unknown_operands(self, snapshot):
        with pytest.raises(UnknownClass):
            snapshot.is_subclass_of("Hotel", "Nope")
        with pytest.raises(UnknownClass):
            snapshot.is_subclass_of("Nope", "Hotel")


class TestSnapshotSerialization:
    def test_round_trip(self, snapshot):
        data = snapshot.to_json_bytes()
        again = VocabularySnapshot.from_json_bytes(data)
        assert again.to_json_bytes() == data
        assert again.classes == snapshot.classes
        assert again.properties == snapshot.properties

    def test_keys_sorted(self, snapshot):
        doc = json.loads(snapshot.to_json_bytes())
        assert list(doc["classes"]) == sorted(doc["classes"])
        assert list(doc["properties"]) == sorted(doc["properties"])

    def test_datatypes_closed_set(self, snapshot):
        assert set(json.loads(snapshot.to_json_bytes())["datatypes"]) == {
            "Text", "URL", "Number", "Integer", "Float", "Boolean",
            "Date", "DateTime", "Time",
        }
