"""JSON helpers shared by the CLI and the pipeline, so both write byte-identical files."""

from __future__ import annotations

import json
from pathlib import Path

from .proxy.forest import RandomForest
from .proxy.tree import DecisionTree


def dumps(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def write_text(path, text: str) -> None:
    Path(path).write_text(text)


def write_json(path, obj) -> None:
    write_text(path, dumps(obj))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def tree_to_json(tree: DecisionTree) -> str:
    return dumps({"kind": "c45_tree", **tree.to_dict()})


def forest_to_json(forest: RandomForest) -> str:
    return dumps(forest.to_dict())


def load_tree(path) -> DecisionTree:
    return DecisionTree.from_dict(read_json(path))


def load_forest(path) -> RandomForest:
    d = read_json(path)
    if d.get("kind") != "random_forest":
        raise ValueError(f"{path} is not a random forest model file")
    return RandomForest.from_dict(d)
