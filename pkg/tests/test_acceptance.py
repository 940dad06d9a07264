"""Acceptance suite: one test per release criterion.

Each test prints a single PASS line on success (visible with `pytest -s`
or `-v` via the test name); tolerances are pinned here, not configurable.
Run with: pytest tests/test_acceptance.py -v
"""

import json
import random
import threading
import time

import pytest
import requests
import uvicorn

from pipeforge.corpus import evaluate_corpus, load_corpus
from pipeforge.dsl import parse, print_program, token_count
from pipeforge.graph import (
    SerializedGraph,
    copy_graph,
    from_json,
    graph_to_dict,
    interpret,
    to_json,
    validate,
)
from pipeforge.layout import column_assignment, optimize_layout
from pipeforge.llm import ReplayBackend
from pipeforge.metric import interactions, oracle_interactions
from pipeforge.server import ServerSettings, create_app

from .conftest import FIXTURES
from .test_cli import run_cli
from .test_service import free_port
from .util import random_pipeline, random_program, scripted_proof_holds

SAMPLES = sorted((FIXTURES / "samples").glob("*.ipc"))


def _ok(name: str) -> None:
    print(f"ACCEPTANCE PASS: {name}")


def test_criterion_dsl_round_trip():
    """parse(print(P)) == P over 1,000 random programs, zero failures, < 5 s."""
    rng = random.Random(0xD51)
    start = time.perf_counter()
    checked = 0
    while checked < 1000:
        program = random_program(rng)
        if not program.statements and not program.sections:
            continue
        assert parse(print_program(program)).program == program
        checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"round-trip property took {elapsed:.2f}s"
    _ok(f"DSL round-trip (1000 programs in {elapsed:.2f}s)")


def test_criterion_fig4_compilation(registry):
    src = (
        "input:\n"
        "input_image_1: input_image()\n"
        'input_text_1: input_text(text="caption this image in detail")\n'
        "processor:\n"
        "pali_1_out = pali_1: pali(image=input_image_1, prompt=input_text_1)\n"
    )
    result = parse(src)
    assert result.diagnostics == ()
    report = interpret(result.program, registry)
    graph = optimize_layout(report.graph)

    golden_text = (FIXTURES / "golden" / "fig4.json").read_text()
    assert graph == from_json(golden_text)
    assert graph_to_dict(graph) == json.loads(golden_text)

    pali = graph.node("pali_1")
    assert [e.source_node_id for e in pali.incoming_edges["image"]] == ["input_image_1"]
    assert [e.source_node_id for e in pali.incoming_edges["prompt"]] == ["input_text_1"]
    _ok("Fig.-style 3-node compilation matches the golden JSON exactly")


def test_criterion_hallucination_disposal(registry):
    src = (
        "input_image_1: input_image()\n"
        'input_text_1: input_text(text="make it pop")\n'
        "pali_1_out = pali_1: pali(image=input_image_1, prompt=input_text_1)\n"
        "super_resolution_1_out = super_resolution_1: super_resolution(image=input_image_1)\n"
        "palm_textgen_1_out = palm_textgen_1: palm_textgen(prompt=pali_1_out)\n"
        "markdown_viewer_1: markdown_viewer(markdown=palm_textgen_1_out)\n"
    )
    result = parse(src)
    assert len(result.program.statements) == 6
    report = interpret(result.program, registry)
    assert len(report.dropped_lines) == 1
    assert report.dropped_lines[0][1] == "unknown node type super_resolution"
    assert report.graph.node_count == 5
    assert validate(report.graph, registry) == []
    _ok("hallucinated line among 6 disposed; remaining 5-node graph valid")


def test_criterion_token_efficiency(registry):
    assert len(SAMPLES) == 5
    for sample in SAMPLES:
        text = sample.read_text()
        report = interpret(parse(text).program, registry)
        assert not report.dropped_lines and not report.dangling_args
        serialized = to_json(optimize_layout(report.graph))
        dsl_tokens = token_count(text)
        json_tokens = token_count(serialized)
        assert dsl_tokens <= 0.20 * json_tokens, (
            f"{sample.name}: {dsl_tokens} vs {json_tokens}"
        )
    _ok("pseudocode <= 20% of pipeline-JSON tokens on all 5 samples")


def test_criterion_layout_invariants(registry):
    def check(graph):
        laid = optimize_layout(graph)
        columns = column_assignment(laid)
        for src, _out, dst, _inp in laid.edges():
            assert columns[src] < columns[dst]
        positions = [(n.position.x, n.position.y) for n in laid.nodes]
        assert len(positions) == len(set(positions))
        assert optimize_layout(laid) == laid

    for sample in SAMPLES:
        check(interpret(parse(sample.read_text()).program, registry).graph)
    for name in ("fig4", "news_summary", "sunglasses"):
        check(from_json((FIXTURES / "golden" / f"{name}.json").read_text()))

    rng = random.Random(0x1A9)
    for _ in range(500):
        check(random_pipeline(registry, rng, max_nodes=10))
    _ok("layout invariants hold on fixtures + 500 random DAGs")


def test_criterion_metric_oracle_equivalence(registry):
    rng = random.Random(0x0E4)
    start = time.perf_counter()
    for trial in range(200):
        generated = random_pipeline(registry, rng, max_nodes=6)
        target = random_pipeline(registry, rng, max_nodes=6)
        report = interactions(generated, target)
        assert report.count == oracle_interactions(generated, target), trial
        assert scripted_proof_holds(generated, target, report), trial
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, f"oracle equivalence took {elapsed:.1f}s"
    _ok(f"metric == oracle + script proof on 200 random pairs ({elapsed:.1f}s)")


def test_criterion_metric_anchors(registry):
    sunglasses = from_json((FIXTURES / "golden" / "sunglasses.json").read_text())
    assert interactions(sunglasses, sunglasses).count == 0

    scratch = interactions(SerializedGraph(), sunglasses)
    assert scratch.count == 12
    assert scratch.ratio == 1.0

    src = (
        "input_image_1: input_image()\n"
        "image_processor_1_out = image_processor_1: image_processor(image=input_image_1)\n"
        "body_segmentation_1_out = body_segmentation_1: body_segmentation(image=image_processor_1_out)\n"
        "mask_visualizer_1_out = mask_visualizer_1: mask_visualizer(mask=body_segmentation_1_out, image=image_processor_1_out)\n"
        "image_viewer_1: image_viewer(image=mask_visualizer_1_out)\n"
    )
    target = interpret(parse(src).program, registry).graph
    assert len(target.nodes) + len(set(target.edges())) == 10
    generated = copy_graph(target)
    victim = generated.node("body_segmentation_1")
    generated.nodes.remove(victim)
    for node in generated.nodes:
        for input_id in list(node.incoming_edges):
            kept = [
                e for e in node.incoming_edges[input_id] if e.source_node_id != victim.id
            ]
            if kept:
                node.incoming_edges[input_id] = kept
            else:
                del node.incoming_edges[input_id]
    report = interactions(generated, target)
    assert report.count == 3
    assert report.ratio == pytest.approx(0.30)
    _ok("metric anchors: identity 0, from-scratch 12 @ 1.0, worked 3/10 = 0.30")


def test_criterion_end_to_end_determinism(tmp_path, replay_cases):
    expectations = {
        "news_summary": (8, 7),
        "sunglasses": (6, 6),
    }
    for name, (want_nodes, want_edges) in expectations.items():
        case = replay_cases[name]
        outputs = []
        for run in (1, 2):
            out = tmp_path / f"{name}_{run}.json"
            proc = run_cli(
                "generate",
                "--instruction",
                case["instruction"],
                "--tag",
                case["tag"],
                "--backend",
                "replay",
                "--out",
                str(out),
            )
            assert proc.returncode == 0, proc.stderr
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1], f"{name}: runs differ byte-wise"

        graph = from_json(outputs[0].decode())
        golden = from_json((FIXTURES / "golden" / f"{name}.json").read_text())
        assert graph == golden
        assert graph.node_count == want_nodes
        assert graph.edge_count == want_edges
    _ok("two CLI runs byte-identical and equal to both golden pipelines")


def test_criterion_corpus_harness(registry):
    unperturbed = load_corpus(FIXTURES / "corpus" / "corpus_unperturbed.json")
    perturbed = load_corpus(FIXTURES / "corpus" / "corpus_perturbed.json")
    assert len(unperturbed) == len(perturbed) == 12

    clean = evaluate_corpus(unperturbed, registry=registry)
    assert clean.overall.mean == 0.0 and clean.overall.std == 0.0
    assert all(agg.mean == 0.0 for agg in clean.by_tag.values())

    noisy = evaluate_corpus(perturbed, registry=registry)
    assert set(noisy.by_tag) == {"language", "visual", "multimodal"}
    for agg in noisy.by_tag.values():
        assert agg.n == 4
        assert agg.mean > 0.0
    assert noisy.overall.n == 12
    _ok("corpus harness: table-shaped aggregates; unperturbed corpus scores 0%")


@pytest.fixture(scope="module")
def acceptance_server():
    app = create_app(ServerSettings(backend=ReplayBackend(FIXTURES / "replay")))
    port = free_port()
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.02)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def test_criterion_service_contract(acceptance_server, replay_cases):
    base = acceptance_server
    golden = json.loads((FIXTURES / "golden" / "sunglasses.json").read_text())

    # /api/nodes triplet
    nodes = requests.get(f"{base}/api/nodes")
    assert nodes.status_code == 200 and len(nodes.json()["nodes"]) == 27
    etag = nodes.headers["ETag"]
    assert requests.get(f"{base}/api/nodes", headers={"If-None-Match": etag}).status_code == 304
    with pytest.raises(Exception):
        create_app(ServerSettings(registry_path="/nonexistent/registry.json"))

    # /api/generate triplet
    case = replay_cases["sunglasses"]
    ok = requests.post(
        f"{base}/api/generate",
        json={"instruction": case["instruction"], "tag": case["tag"]},
    )
    assert ok.status_code == 200 and ok.json()["graph"] == golden
    assert (
        requests.post(f"{base}/api/generate", json={"instruction": "x", "tag": "audio"}).status_code
        == 400
    )
    down = requests.post(
        f"{base}/api/generate", json={"instruction": "nothing canned", "tag": "visual"}
    )
    assert down.status_code == 502 and down.json()["stage"] == "selector"

    # /api/compile triplet
    fig4 = (
        "input_image_1: input_image()\n"
        'input_text_1: input_text(text="caption this image in detail")\n'
        "pali_1_out = pali_1: pali(image=input_image_1, prompt=input_text_1)\n"
    )
    compiled = requests.post(f"{base}/api/compile", json={"pseudocode": fig4})
    assert compiled.status_code == 200 and len(compiled.json()["graph"]["nodes"]) == 3
    one_bad = requests.post(
        f"{base}/api/compile",
        json={"pseudocode": fig4 + "warp_core_1_out = warp_core_1: warp_core(image=input_image_1)\n"},
    )
    assert len(one_bad.json()["droppedLines"]) == 1
    assert requests.post(f"{base}/api/compile", data=b"").status_code == 400

    # /api/evaluate triplet
    same = requests.post(f"{base}/api/evaluate", json={"generated": golden, "target": golden})
    assert same.json()["count"] == 0
    scratch = requests.post(
        f"{base}/api/evaluate", json={"generated": {"nodes": []}, "target": golden}
    ).json()
    assert scratch["count"] == 12 and scratch["ratio"] == 1.0
    big = {
        "nodes": [
            {"id": f"input_text_{i}", "nodeSpecId": "input_text", "incomingEdges": {}, "params": {}, "position": {"x": 0, "y": 0}}
            for i in range(1, 21)
        ]
    }
    assert (
        requests.post(f"{base}/api/evaluate", json={"generated": big, "target": golden}).status_code
        == 409
    )
    _ok("service contract: all endpoint example triplets against a live server")
