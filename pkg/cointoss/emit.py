"""CSV and JSON output. Float formatting is fixed so repeated runs are byte-identical."""
import json
import logging
import sys
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import pandas as pd
from pydantic import BaseModel


logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


def frame(rows: Iterable[dict], columns: Sequence[str]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=list(columns))


def write_csv(df: pd.DataFrame, path: Optional[Path] = None) -> str:
    """Write ``df`` to ``path`` (stdout when None) and return the CSV text."""
    text = df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    _write(text, path)
    return text


def write_json(payload: Union[BaseModel, dict, list], path: Optional[Path] = None) -> str:
    if isinstance(payload, BaseModel):
        text = payload.model_dump_json(indent=2)
    else:
        text = json.dumps(payload, indent=2, sort_keys=True)
    _write(text + "\n", path)
    return text


def _write(text: str, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info("Wrote %s (%d bytes)", path, len(text))
