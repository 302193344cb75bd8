"""Golden case schema and loader for regression evaluation."""

import json
from pathlib import Path
from typing import Any, Dict, List, Literal

from pydantic import BaseModel, Field

Operation = Literal[
    "allocate",
    "surplus_stats",
    "nbs_solve",
    "build_game",
    "nucleolus",
    "lef_bids",
    "map_to_correlated",
    "dropout",
]

GOLDEN_PATH = Path(__file__).parent / "golden_cases.json"


class EvalCase(BaseModel):
    """One operation applied to a fixed input, with expected output fields."""

    name: str = Field(..., description="Case name for identification")
    operation: Operation = Field(..., description="Operation under test")
    input: Dict[str, Any] = Field(..., description="Operation arguments")
    expected: Dict[str, Any] = Field(..., description="Output field -> expected value")
    tolerance: float = Field(default=1e-9, gt=0, description="Absolute tolerance on numeric fields")


def load_golden_cases(path: Path = GOLDEN_PATH) -> List[EvalCase]:
    with open(path, encoding="utf-8") as f:
        return [EvalCase.model_validate(c) for c in json.load(f)]
