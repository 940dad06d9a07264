import random

import pytest

from pipeforge.dsl import parse
from pipeforge.graph import IncomingEdge, SerializedGraph, SerializedNode, interpret
from pipeforge.layout import (
    GAP_X,
    GAP_Y,
    NODE_HEIGHT,
    NODE_WIDTH,
    LayoutCycleError,
    column_assignment,
    optimize_layout,
)

from .util import random_pipeline

STEP_X = NODE_WIDTH + GAP_X
STEP_Y = NODE_HEIGHT + GAP_Y


def chain(*spec_ids):
    nodes = []
    for i, spec in enumerate(spec_ids):
        edges = {}
        if i > 0:
            edges = {"image": [IncomingEdge(nodes[-1].id, "result")]}
        nodes.append(
            SerializedNode(id=f"{spec}_{i + 1}", node_spec_id=spec, incoming_edges=edges)
        )
    return SerializedGraph(nodes=nodes)


def test_chain_columns():
    g = optimize_layout(chain("input_image", "image_processor", "image_viewer"))
    assert [(n.position.x, n.position.y) for n in g.nodes] == [
        (0, 0),
        (STEP_X, 0),
        (2 * STEP_X, 0),
    ]


def test_diamond_rows_follow_insertion_order():
    g = SerializedGraph(
        nodes=[
            SerializedNode(id="input_image_1", node_spec_id="input_image"),
            SerializedNode(
                id="image_processor_1",
                node_spec_id="image_processor",
                incoming_edges={"image": [IncomingEdge("input_image_1", "result")]},
            ),
            SerializedNode(
                id="image_processor_2",
                node_spec_id="image_processor",
                incoming_edges={"image": [IncomingEdge("input_image_1", "result")]},
            ),
            SerializedNode(
                id="image_mixer_1",
                node_spec_id="image_mixer",
                incoming_edges={
                    "image1": [IncomingEdge("image_processor_1", "result")],
                    "image2": [IncomingEdge("image_processor_2", "result")],
                },
            ),
        ]
    )
    out = optimize_layout(g)
    positions = {n.id: (n.position.x, n.position.y) for n in out.nodes}
    assert positions["input_image_1"] == (0, 0)
    assert positions["image_processor_1"] == (STEP_X, 0)
    assert positions["image_processor_2"] == (STEP_X, STEP_Y)
    assert positions["image_mixer_1"] == (2 * STEP_X, 0)


def test_columns_zero_for_sources(registry, fixtures_dir):
    source = (fixtures_dir / "samples" / "news_summary.ipc").read_text()
    graph = interpret(parse(source).program, registry).graph
    columns = column_assignment(graph)
    assert columns["input_text_1"] == 0
    assert columns["input_text_2"] == 0
    assert columns["markdown_viewer_1"] == max(columns.values())


def _assert_layout_invariants(graph):
    laid = optimize_layout(graph)
    columns = column_assignment(laid)
    for src, _out, dst, _inp in laid.edges():
        assert columns[src] < columns[dst]
    positions = [(n.position.x, n.position.y) for n in laid.nodes]
    assert len(positions) == len(set(positions))
    again = optimize_layout(laid)
    assert again == laid
    return laid


def test_sunglasses_fixture_flows_left_to_right(registry, fixtures_dir):
    source = (fixtures_dir / "samples" / "sunglasses.ipc").read_text()
    graph = interpret(parse(source).program, registry).graph
    _assert_layout_invariants(graph)


def test_random_dags_satisfy_invariants(registry):
    rng = random.Random(42)
    for _ in range(100):
        graph = random_pipeline(registry, rng, max_nodes=10)
        _assert_layout_invariants(graph)


def test_layout_preserves_everything_but_positions(registry, fixtures_dir):
    source = (fixtures_dir / "samples" / "depth_photo.ipc").read_text()
    graph = interpret(parse(source).program, registry).graph
    laid = optimize_layout(graph)
    assert [n.id for n in laid.nodes] == [n.id for n in graph.nodes]
    for before, after in zip(graph.nodes, laid.nodes):
        assert before.incoming_edges == after.incoming_edges
        assert before.params == after.params


def test_cycle_raises_naming_back_edge():
    g = SerializedGraph(
        nodes=[
            SerializedNode(
                id="a_1",
                node_spec_id="image_processor",
                incoming_edges={"image": [IncomingEdge("b_1", "result")]},
            ),
            SerializedNode(
                id="b_1",
                node_spec_id="image_processor",
                incoming_edges={"image": [IncomingEdge("a_1", "result")]},
            ),
        ]
    )
    with pytest.raises(LayoutCycleError) as err:
        optimize_layout(g)
    assert set(err.value.back_edge) == {"a_1", "b_1"}
