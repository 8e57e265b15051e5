"""JSON Schemas (draft 2020-12) for the CLI outputs and run manifests."""

import json
from functools import lru_cache
from importlib.resources import files


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    return json.loads(files(__name__).joinpath(f"{name}.json").read_text())
