import pytest
import torch

from expr_extractor.models import ExpressionModel, FrModel

from imagegen import write_image, write_labels


@pytest.fixture(scope="session")
def checkpoints(tmp_path_factory):
    """Random-weight checkpoints; the contracts under test are shape and
    alignment properties, which hold for any weights."""
    root = tmp_path_factory.mktemp("ckpt")
    torch.manual_seed(0)
    paths = {}
    for name, model in (
        ("b0", ExpressionModel("b0")),
        ("b2", ExpressionModel("b2")),
        ("fr", FrModel()),
    ):
        paths[name] = root / f"{name}.pt"
        torch.save(model.state_dict(), paths[name])
    return paths


@pytest.fixture()
def sample_set(tmp_path):
    """Six images over three subjects; subject A holds three of them."""
    image_root = tmp_path / "images"
    image_root.mkdir()
    rows = [
        ("a1.png", "subjA", "toy", "neutral"),
        ("a2.png", "subjA", "toy", "happiness"),
        ("a3.png", "subjA", "toy", "neutral"),
        ("b1.png", "subjB", "toy", "anger"),
        ("b2.png", "subjB", "toy", "neutral"),
        ("c1.png", "subjC", "toy", "surprise"),
    ]
    for i, row in enumerate(rows):
        write_image(image_root / row[0], seed=i)
    labels = tmp_path / "labels.csv"
    write_labels(labels, rows)
    return image_root, labels, rows
