import random

import pytest

from pipeforge.dsl import parse
from pipeforge.graph import (
    IncomingEdge,
    SerializedGraph,
    SerializedNode,
    copy_graph,
    from_json,
    interpret,
)
from pipeforge.metric import (
    BudgetExceededError,
    EditOp,
    InvalidGraphError,
    ScriptError,
    apply_script,
    interactions,
    mapping_cost,
    oracle_interactions,
)

from .util import random_pipeline, scripted_proof_holds


@pytest.fixture(scope="module")
def sunglasses(registry, fixtures_dir):
    return from_json((fixtures_dir / "golden" / "sunglasses.json").read_text())


@pytest.fixture(scope="module")
def news(registry, fixtures_dir):
    return from_json((fixtures_dir / "golden" / "news_summary.json").read_text())


def test_identity_costs_nothing(sunglasses, news):
    for graph in (sunglasses, news):
        report = interactions(graph, graph)
        assert report.count == 0
        assert report.ratio == 0.0
        assert report.script == []


def test_empty_to_sunglasses_is_from_scratch(sunglasses):
    report = interactions(SerializedGraph(), sunglasses)
    assert report.from_scratch == 12
    assert report.count == 12
    assert report.ratio == 1.0
    assert sum(1 for op in report.script if op.kind == "add_node") == 6
    assert sum(1 for op in report.script if op.kind == "add_edge") == 6


def test_worked_thirty_percent_ratio(registry):
    """A generated graph needing 3 edits against a 10-edit-from-scratch target."""
    src = (
        "input_image_1: input_image()\n"
        "image_processor_1_out = image_processor_1: image_processor(image=input_image_1)\n"
        "body_segmentation_1_out = body_segmentation_1: body_segmentation(image=image_processor_1_out)\n"
        "mask_visualizer_1_out = mask_visualizer_1: mask_visualizer(mask=body_segmentation_1_out, image=image_processor_1_out)\n"
        "image_viewer_1: image_viewer(image=mask_visualizer_1_out)\n"
    )
    target = interpret(parse(src).program, registry).graph
    assert len(target.nodes) + len(set(target.edges())) == 10

    # body_segmentation_1 has exactly two incident edges, so restoring it
    # takes one node add plus two edge adds: 3 interactions.
    generated = copy_graph(target)
    victim = generated.node("body_segmentation_1")
    generated.nodes.remove(victim)
    for node in generated.nodes:
        for input_id in list(node.incoming_edges):
            kept = [
                e
                for e in node.incoming_edges[input_id]
                if e.source_node_id != victim.id
            ]
            if kept:
                node.incoming_edges[input_id] = kept
            else:
                del node.incoming_edges[input_id]

    report = interactions(generated, target)
    assert report.count == 3
    assert report.count == oracle_interactions(generated, target)
    assert report.ratio == pytest.approx(0.30)


def test_news_missing_two_nodes_matches_oracle(registry, news):
    generated = copy_graph(news)
    for victim_id in ("url_to_html_1", "palm_textgen_1"):
        victim = generated.node(victim_id)
        generated.nodes.remove(victim)
        for node in generated.nodes:
            for input_id in list(node.incoming_edges):
                kept = [
                    e
                    for e in node.incoming_edges[input_id]
                    if e.source_node_id != victim_id
                ]
                if kept:
                    node.incoming_edges[input_id] = kept
                else:
                    del node.incoming_edges[input_id]

    report = interactions(generated, news)
    assert report.count == oracle_interactions(generated, news)
    assert scripted_proof_holds(generated, news, report)


def test_single_node_pairs():
    same_a = SerializedGraph(nodes=[SerializedNode(id="pali_1", node_spec_id="pali")])
    same_b = SerializedGraph(nodes=[SerializedNode(id="pali_9", node_spec_id="pali")])
    assert oracle_interactions(same_a, same_b) == 0
    assert interactions(same_a, same_b).count == 0

    other = SerializedGraph(nodes=[SerializedNode(id="imagen_1", node_spec_id="imagen")])
    assert oracle_interactions(same_a, other) == 2  # delete one, add the other
    assert interactions(same_a, other).count == 2


def test_partial_mapping_can_beat_full_mapping(registry):
    """Keeping a node mapped can cost more than deleting and re-adding it."""
    hub = SerializedNode(
        id="text_processor_1",
        node_spec_id="text_processor",
        incoming_edges={
            "text1": [
                IncomingEdge("input_text_1", "result"),
                IncomingEdge("input_text_2", "result"),
            ],
            "text2": [IncomingEdge("input_text_3", "result")],
        },
    )
    sources = [
        SerializedNode(id=f"input_text_{i}", node_spec_id="input_text")
        for i in (1, 2, 3)
    ]
    generated = SerializedGraph(nodes=[*sources, hub])
    target = SerializedGraph(
        nodes=[
            *[copy_graph(SerializedGraph(nodes=[s])).nodes[0] for s in sources],
            SerializedNode(id="text_processor_1", node_spec_id="text_processor"),
        ]
    )
    report = interactions(generated, target)
    assert report.count == 2  # delete the wired hub (cascade), add a bare one
    assert report.count == oracle_interactions(generated, target)
    assert "text_processor_1" not in report.mapping


def test_oracle_equivalence_on_random_pairs(registry):
    rng = random.Random(2024)
    for trial in range(50):
        generated = random_pipeline(registry, rng, max_nodes=6)
        target = random_pipeline(registry, rng, max_nodes=6)
        for cascade in (True, False):
            report = interactions(generated, target, cascade=cascade)
            expected = oracle_interactions(generated, target, cascade=cascade)
            assert report.count == expected, (trial, cascade)
            assert scripted_proof_holds(generated, target, report), (trial, cascade)


def test_no_cascade_counts_edges_separately(sunglasses):
    report = interactions(sunglasses, SerializedGraph(), cascade=False)
    assert report.count == 12  # 6 node deletes + 6 explicit edge deletes
    cascade_report = interactions(sunglasses, SerializedGraph())
    assert cascade_report.count == 6


def test_mapping_cost_definition(sunglasses):
    full = {n.id: n.id for n in sunglasses.nodes}
    assert mapping_cost(sunglasses, sunglasses, full) == 0
    # empty mapping: 6 deletes (edges cascade) + 6 adds + 6 edge adds
    assert mapping_cost(sunglasses, sunglasses, {}) == 18
    # without cascade the six edge deletions are charged too
    assert mapping_cost(sunglasses, sunglasses, {}, cascade=False) == 24


def test_tie_break_is_deterministic(registry):
    rng = random.Random(7)
    for _ in range(20):
        generated = random_pipeline(registry, rng, max_nodes=5)
        target = random_pipeline(registry, rng, max_nodes=5)
        a = interactions(generated, target)
        b = interactions(generated, target)
        assert a.mapping == b.mapping
        assert a.script == b.script


def test_apply_script_empty_is_identity(sunglasses):
    assert apply_script(sunglasses, []) == sunglasses


def test_apply_script_delete_node_cascades(sunglasses):
    script = [EditOp("delete_node", {"nodeId": "virtual_sticker_1"})]
    result = apply_script(sunglasses, script)
    assert result.node_count == 5
    assert result.edge_count == 2  # its three incoming and one outgoing edge vanished


def test_apply_script_inapplicable_op_reports_index(sunglasses):
    script = [
        EditOp("delete_node", {"nodeId": "image_viewer_1"}),
        EditOp("delete_node", {"nodeId": "image_viewer_1"}),
    ]
    with pytest.raises(ScriptError, match="op 1"):
        apply_script(sunglasses, script)


def test_apply_script_rejects_duplicate_add(sunglasses):
    script = [
        EditOp(
            "add_node",
            {"nodeId": "image_viewer_1", "nodeSpecId": "image_viewer", "targetNodeId": "x"},
        )
    ]
    with pytest.raises(ScriptError, match="already exists"):
        apply_script(sunglasses, script)


def test_budget_node_bound(sunglasses):
    big = SerializedGraph(
        nodes=[
            SerializedNode(id=f"input_text_{i}", node_spec_id="input_text")
            for i in range(1, 21)
        ]
    )
    with pytest.raises(BudgetExceededError):
        interactions(big, sunglasses)


def test_budget_state_bound(registry):
    rng = random.Random(3)
    generated = random_pipeline(registry, rng, min_nodes=6, max_nodes=6)
    target = random_pipeline(registry, rng, min_nodes=6, max_nodes=6)
    with pytest.raises(BudgetExceededError):
        interactions(generated, target, max_states=2)


def test_oracle_size_bound():
    big = SerializedGraph(
        nodes=[
            SerializedNode(id=f"input_text_{i}", node_spec_id="input_text")
            for i in range(1, 10)
        ]
    )
    with pytest.raises(BudgetExceededError):
        oracle_interactions(big, big)


def test_invalid_graph_rejected_when_registry_given(registry, sunglasses):
    broken = copy_graph(sunglasses)
    broken.nodes[0].node_spec_id = "warp_drive"
    with pytest.raises(InvalidGraphError) as err:
        interactions(broken, sunglasses, registry=registry)
    assert err.value.which == "generated"
    assert err.value.violations


def test_ratio_zero_for_empty_target():
    generated = SerializedGraph(
        nodes=[SerializedNode(id="pali_1", node_spec_id="pali")]
    )
    report = interactions(generated, SerializedGraph())
    assert report.count == 1
    assert report.from_scratch == 0
    assert report.ratio == 0.0
