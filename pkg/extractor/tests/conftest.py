import json

import pytest

from sps_extractor import make_tiny_model


@pytest.fixture(scope="session")
def tiny_model(tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "tiny"
    make_tiny_model(path, seed=0, dim=64, layers=2, heads=2)
    return str(path)


@pytest.fixture(scope="session")
def qa_inputs(tmp_path_factory):
    items = [
        {
            "query_id": "q0",
            "question": "Where is the Eiffel Tower?",
            "documents": [
                "The Eiffel Tower is a landmark in Paris, France.",
                "It was completed in 1889 for the World's Fair.",
            ],
            "gold_answers": ["Paris"],
        },
        {
            "query_id": "q1",
            "question": "Who wrote The Odyssey?",
            "documents": ["The Odyssey is an ancient Greek epic attributed to Homer."],
            "gold_answers": ["Homer"],
        },
    ]
    path = tmp_path_factory.mktemp("inputs") / "inputs.json"
    path.write_text(json.dumps(items))
    return str(path), items
