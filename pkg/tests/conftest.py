from collections.abc import Callable
from pathlib import Path

import pytest

from src.core.logging import configure_logging


@pytest.fixture(autouse=True, scope="session")
def _quiet_logging() -> None:
    configure_logging("ERROR", json_output=False)


@pytest.fixture
def edge_file(tmp_path: Path) -> Callable[..., Path]:
    def write(text: str, name: str = "graph.txt") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write
